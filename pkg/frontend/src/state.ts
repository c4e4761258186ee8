/**
 * UI view state and its pure transitions.
 *
 * State is only ever replaced from API responses (no optimistic updates):
 * controllers call the API, then derive the next state from what came back.
 */

import type {
  AblationMode,
  DetectResult,
  DraftSnapshot,
  ElicitationQuestion,
  ContextKeyInfo,
  SelectionCandidate,
  SelectionPurpose,
  TreeSnapshot,
} from "./api.js";

export type Modal = "none" | "elicitation" | "context_selection" | "draft_questions";

export interface DraftPane {
  content: string;
  revision: number;
  pendingAction: string | null;
}

export interface ViewState {
  sessionId: string;
  mode: AblationMode;
  tree: TreeSnapshot;
  selectedNode: string;
  globalKeys: ContextKeyInfo[];
  localKeys: ContextKeyInfo[];
  activeModal: Modal;
  detection: DetectResult | null;
  candidates: SelectionCandidate[];
  selectionPurpose: SelectionPurpose;
  questions: ElicitationQuestion[];
  draftPane: DraftPane | null;
  banner: string | null;
}

export function initialState(
  sessionId: string,
  mode: AblationMode,
  tree: TreeSnapshot,
  questions: ElicitationQuestion[],
): ViewState {
  return {
    sessionId,
    mode,
    tree,
    selectedNode: tree.root,
    globalKeys: [],
    localKeys: [],
    activeModal: questions.length > 0 ? "elicitation" : "none",
    detection: null,
    candidates: [],
    selectionPurpose: "drafting",
    questions,
    draftPane: null,
    banner: null,
  };
}

/** Invariant check: the selected node exists and at most one modal is open
 * (the modal enum makes the latter structural; verify the former). */
export function assertConsistent(state: ViewState): void {
  if (!(state.selectedNode in state.tree.nodes)) {
    throw new Error(`selected node ${state.selectedNode} is not in the tree snapshot`);
  }
}

export function withTree(state: ViewState, tree: TreeSnapshot): ViewState {
  const selectedNode = state.selectedNode in tree.nodes ? state.selectedNode : tree.root;
  return { ...state, tree, selectedNode };
}

export function selectNode(state: ViewState, nodeId: string): ViewState {
  if (!(nodeId in state.tree.nodes)) {
    return state;
  }
  return { ...state, selectedNode: nodeId, detection: null, draftPane: null, banner: null };
}

export function openModal(state: ViewState, modal: Modal): ViewState {
  return { ...state, activeModal: modal };
}

export function closeModal(state: ViewState): ViewState {
  return { ...state, activeModal: "none" };
}

export function withDraft(state: ViewState, draft: DraftSnapshot): ViewState {
  return {
    ...state,
    activeModal: "none",
    draftPane: { content: draft.content, revision: draft.revision, pendingAction: null },
  };
}

export function toggleCandidate(state: ViewState, key: string): ViewState {
  return {
    ...state,
    candidates: state.candidates.map((c) =>
      c.key === key ? { ...c, accepted: !c.accepted } : c,
    ),
  };
}

/** Add one of the remaining local keys to the checklist (pre-accepted). */
export function addCandidate(state: ViewState, key: string): ViewState {
  if (state.candidates.some((c) => c.key === key)) {
    return state;
  }
  return {
    ...state,
    candidates: [...state.candidates, { key, reason: "added by user", accepted: true }],
  };
}

export function acceptedKeys(state: ViewState): string[] {
  return state.candidates.filter((c) => c.accepted).map((c) => c.key);
}

/** Keys shown in the checklist drop-down: local keys not already listed. */
export function remainingLocalKeys(state: ViewState): string[] {
  const listed = new Set(state.candidates.map((c) => c.key));
  return state.localKeys.map((k) => k.key).filter((key) => !listed.has(key));
}

/** Depth-first order of visible nodes, for arrow-key navigation. */
export function outlineOrder(tree: TreeSnapshot): string[] {
  const order: string[] = [];
  const visit = (nodeId: string): void => {
    const node = tree.nodes[nodeId];
    if (node === undefined) {
      return;
    }
    order.push(nodeId);
    for (const child of node.children) {
      visit(child);
    }
  };
  visit(tree.root);
  return order;
}

export function moveSelection(state: ViewState, delta: 1 | -1): ViewState {
  const order = outlineOrder(state.tree);
  const index = order.indexOf(state.selectedNode);
  const next = order[index + delta];
  return next === undefined ? state : selectNode(state, next);
}
