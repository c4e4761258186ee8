import { readFileSync } from "node:fs";

import type {
  AnswerItem,
  ContextKeyInfo,
  DetectResult,
  DraftActionBody,
  DraftActionResult,
  ElicitationQuestion,
  PlanApi,
  SelectionCandidate,
  SelectionPurpose,
  TaskNodeSnapshot,
  TreeSnapshot,
  AblationMode,
} from "../src/api.js";
import { initialState, type ViewState } from "../src/state.js";

function loadFixture<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export const walkthroughTree = (): TreeSnapshot => loadFixture("walkthrough_tree.json");
export const selectionCandidates = (): SelectionCandidate[] =>
  loadFixture("selection_candidates.json");
export const localKeys = (): ContextKeyInfo[] => loadFixture("local_keys.json");
export const elicitationQuestions = (): ElicitationQuestion[] =>
  loadFixture("elicitation_questions.json");

export interface RecordedCall {
  method: string;
  args: unknown[];
}

/** PlanApi stub: records every call and replies with canned values. */
export class StubApi implements PlanApi {
  calls: RecordedCall[] = [];
  tree: TreeSnapshot = walkthroughTree();
  detection: DetectResult = { needs_decomposition: false, should_fork: false, reasoning: "r" };
  candidates: SelectionCandidate[] = selectionCandidates();
  draftResults: DraftActionResult[] = [];
  failWith: Error | null = null;

  private record<T>(method: string, args: unknown[], result: T): Promise<T> {
    if (this.failWith !== null) {
      return Promise.reject(this.failWith);
    }
    this.calls.push({ method, args });
    return Promise.resolve(result);
  }

  callsTo(method: string): RecordedCall[] {
    return this.calls.filter((call) => call.method === method);
  }

  createSession(goal: string, mode: AblationMode, description?: string) {
    return this.record("createSession", [goal, mode, description], {
      session_id: "s-test",
      questions: elicitationQuestions(),
    });
  }

  commitAnswers(sessionId: string, answers: AnswerItem[]) {
    return this.record("commitAnswers", [sessionId, answers], ["a key"]);
  }

  getTree(sessionId: string) {
    return this.record("getTree", [sessionId], this.tree);
  }

  detect(sessionId: string, nodeId: string) {
    return this.record("detect", [sessionId, nodeId], this.detection);
  }

  decompose(sessionId: string, nodeId: string, acceptedKeys?: string[]) {
    return this.record("decompose", [sessionId, nodeId, acceptedKeys], [] as TaskNodeSnapshot[]);
  }

  selectContext(sessionId: string, nodeId: string, purpose: SelectionPurpose) {
    return this.record("selectContext", [sessionId, nodeId, purpose], this.candidates);
  }

  draftAction(sessionId: string, nodeId: string, body: DraftActionBody) {
    const result = this.draftResults.shift() ?? {
      draft: {
        node: nodeId,
        content: `draft for ${nodeId}`,
        context_keys_used: body.accepted_keys ?? [],
        revision: 1,
        lineage: "initial",
      },
    };
    return this.record("draftAction", [sessionId, nodeId, body], result);
  }

  listContext(sessionId: string, scope: "global" | "local") {
    return this.record("listContext", [sessionId, scope], scope === "local" ? localKeys() : []);
  }

  addContext(sessionId: string, key: string, value: string) {
    return this.record("addContext", [sessionId, key, value], key);
  }
}

export function stateFor(
  mode: AblationMode = "full_curation",
  overrides: Partial<ViewState> = {},
): ViewState {
  const base = initialState("s-test", mode, walkthroughTree(), []);
  return { ...base, localKeys: localKeys(), ...overrides };
}
