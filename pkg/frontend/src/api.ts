/**
 * Typed client for the planning service HTTP API.
 *
 * Everything the UI does goes through the `PlanApi` interface so tests can
 * substitute a stub; `HttpPlanApi` is the real fetch-based implementation.
 */

export type AblationMode = "reuse_only" | "selection_and_reuse" | "full_curation";
export type NodeStatus = "unexplored" | "exploring" | "completed";
export type DecompositionKind = "none" | "standard" | "fork";
export type SelectionPurpose = "drafting" | "forking";
export type DraftAction = "generate" | "regenerate" | "elicit_and_regenerate" | "iterate" | "save";

export interface TaskNodeSnapshot {
  id: string;
  title: string;
  description: string;
  estimated_duration: string;
  status: NodeStatus;
  decomposition: DecompositionKind;
  draft_ref: string | null;
  parent: string | null;
  children: string[];
  level: number;
}

export interface TreeSnapshot {
  root: string;
  created_at: string;
  nodes: Record<string, TaskNodeSnapshot>;
}

export interface ElicitationQuestion {
  id: string;
  question: string;
  expects_file: boolean;
  answer: string | null;
  answered: boolean;
}

export interface AnswerItem {
  question_id: string;
  text: string;
  is_file?: boolean;
}

export interface ContextKeyInfo {
  key: string;
  provenance: string;
  source_node: string | null;
}

export interface SelectionCandidate {
  key: string;
  reason: string;
  accepted: boolean;
}

export interface DraftSnapshot {
  node: string;
  content: string;
  context_keys_used: string[];
  revision: number;
  lineage: string;
}

export interface DetectResult {
  needs_decomposition: boolean;
  should_fork: boolean;
  reasoning: string;
}

/** Result of POST .../draft: exactly one field is present per action. */
export interface DraftActionResult {
  draft?: DraftSnapshot;
  questions?: ElicitationQuestion[];
  saved_key?: string;
}

export interface DraftActionBody {
  action: DraftAction;
  accepted_keys?: string[];
  instruction?: string;
  answers?: AnswerItem[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface PlanApi {
  createSession(
    goal: string,
    mode: AblationMode,
    description?: string,
  ): Promise<{ session_id: string; questions: ElicitationQuestion[] }>;
  commitAnswers(sessionId: string, answers: AnswerItem[]): Promise<string[]>;
  getTree(sessionId: string): Promise<TreeSnapshot>;
  detect(sessionId: string, nodeId: string): Promise<DetectResult>;
  decompose(sessionId: string, nodeId: string, acceptedKeys?: string[]): Promise<TaskNodeSnapshot[]>;
  selectContext(
    sessionId: string,
    nodeId: string,
    purpose: SelectionPurpose,
  ): Promise<SelectionCandidate[]>;
  draftAction(sessionId: string, nodeId: string, body: DraftActionBody): Promise<DraftActionResult>;
  listContext(sessionId: string, scope: "global" | "local"): Promise<ContextKeyInfo[]>;
  addContext(sessionId: string, key: string, value: string): Promise<string>;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(`${base}${path}`, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    const body = await response
      .json()
      .catch(() => ({ code: "unknown", message: response.statusText }));
    throw new ApiError(response.status, body.code ?? "unknown", body.message ?? "request failed");
  }
  return response.json() as Promise<T>;
}

export class HttpPlanApi implements PlanApi {
  constructor(private readonly base: string = "") {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return request<T>(this.base, path, { method: "POST", body: JSON.stringify(body) });
  }

  async createSession(goal: string, mode: AblationMode, description = "") {
    return this.post<{ session_id: string; questions: ElicitationQuestion[] }>("/sessions", {
      goal,
      mode,
      description,
    });
  }

  async commitAnswers(sessionId: string, answers: AnswerItem[]): Promise<string[]> {
    const body = await this.post<{ global_context_keys: string[] }>(
      `/sessions/${sessionId}/answers`,
      { answers },
    );
    return body.global_context_keys;
  }

  getTree(sessionId: string): Promise<TreeSnapshot> {
    return request<TreeSnapshot>(this.base, `/sessions/${sessionId}/tree`);
  }

  detect(sessionId: string, nodeId: string): Promise<DetectResult> {
    return this.post<DetectResult>(`/sessions/${sessionId}/nodes/${nodeId}/detect`, {});
  }

  async decompose(sessionId: string, nodeId: string, acceptedKeys?: string[]) {
    const body = await this.post<{ children: TaskNodeSnapshot[] }>(
      `/sessions/${sessionId}/nodes/${nodeId}/decompose`,
      acceptedKeys ? { accepted_keys: acceptedKeys } : {},
    );
    return body.children;
  }

  async selectContext(sessionId: string, nodeId: string, purpose: SelectionPurpose) {
    const body = await this.post<{ candidates: SelectionCandidate[] }>(
      `/sessions/${sessionId}/nodes/${nodeId}/context-selection`,
      { purpose },
    );
    return body.candidates;
  }

  draftAction(sessionId: string, nodeId: string, body: DraftActionBody) {
    return this.post<DraftActionResult>(`/sessions/${sessionId}/nodes/${nodeId}/draft`, body);
  }

  async listContext(sessionId: string, scope: "global" | "local") {
    const body = await request<{ entries: ContextKeyInfo[] }>(
      this.base,
      `/sessions/${sessionId}/context?scope=${scope}`,
    );
    return body.entries;
  }

  async addContext(sessionId: string, key: string, value: string): Promise<string> {
    const body = await this.post<{ key: string }>(`/sessions/${sessionId}/context`, { key, value });
    return body.key;
  }
}
