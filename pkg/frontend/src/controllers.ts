/**
 * Action handlers: each takes the API and the current state, performs the
 * request, and returns the next state derived from the response. Nothing is
 * rendered optimistically; a failed call leaves the state untouched except
 * for an explanatory banner where that is the designed behavior.
 */

import type { AnswerItem, PlanApi, SelectionPurpose } from "./api.js";
import type { ViewState } from "./state.js";
import {
  acceptedKeys,
  closeModal,
  openModal,
  selectNode,
  withDraft,
  withTree,
} from "./state.js";

async function refreshTree(api: PlanApi, state: ViewState): Promise<ViewState> {
  const tree = await api.getTree(state.sessionId);
  const localKeys = await api.listContext(state.sessionId, "local");
  return withTree({ ...state, localKeys }, tree);
}

/** Selecting a node runs detection so the panel can highlight the
 * recommended action; a provider failure degrades to a warning banner with
 * both actions enabled. */
export async function openNode(api: PlanApi, state: ViewState, nodeId: string): Promise<ViewState> {
  const selected = selectNode(state, nodeId);
  try {
    const detection = await api.detect(selected.sessionId, nodeId);
    return { ...selected, detection };
  } catch {
    return { ...selected, detection: null, banner: "recommendation unavailable" };
  }
}

/** Standard decomposition, or the fork path when detection said to fork
 * (the engine expects the accepted context keys in that case). */
export async function decomposeSelected(api: PlanApi, state: ViewState): Promise<ViewState> {
  if (state.detection?.should_fork === true) {
    const candidates = await api.selectContext(state.sessionId, state.selectedNode, "forking");
    return openModal({ ...state, candidates, selectionPurpose: "forking" }, "context_selection");
  }
  await api.decompose(state.sessionId, state.selectedNode);
  return refreshTree(api, state);
}

/** "Work on this task": pick context first when selection is available,
 * otherwise draft immediately over everything (reuse-only mode). */
export async function workOnSelected(api: PlanApi, state: ViewState): Promise<ViewState> {
  if (state.mode === "reuse_only" || state.localKeys.length === 0) {
    const result = await api.draftAction(state.sessionId, state.selectedNode, {
      action: "generate",
      accepted_keys: [],
    });
    return result.draft ? withDraft(state, result.draft) : state;
  }
  const candidates = await api.selectContext(state.sessionId, state.selectedNode, "drafting");
  return openModal({ ...state, candidates, selectionPurpose: "drafting" }, "context_selection");
}

export async function confirmSelection(api: PlanApi, state: ViewState): Promise<ViewState> {
  const keys = acceptedKeys(state);
  if (state.selectionPurpose === "forking") {
    await api.decompose(state.sessionId, state.selectedNode, keys);
    return refreshTree(api, closeModal(state));
  }
  const result = await api.draftAction(state.sessionId, state.selectedNode, {
    action: "generate",
    accepted_keys: keys,
  });
  return result.draft ? withDraft(closeModal(state), result.draft) : closeModal(state);
}

export async function regenerate(api: PlanApi, state: ViewState): Promise<ViewState> {
  const result = await api.draftAction(state.sessionId, state.selectedNode, {
    action: "regenerate",
    accepted_keys: acceptedKeys(state),
  });
  return result.draft ? withDraft(state, result.draft) : state;
}

/** Phase one of "Add Context and Regenerate": fetch the clarifying
 * questions and open the modal. */
export async function addContextAndRegenerate(api: PlanApi, state: ViewState): Promise<ViewState> {
  const result = await api.draftAction(state.sessionId, state.selectedNode, {
    action: "elicit_and_regenerate",
  });
  if (!result.questions) {
    return state;
  }
  return openModal({ ...state, questions: result.questions }, "draft_questions");
}

/** Phase two: post the answers; the response carries the regenerated draft. */
export async function submitDraftAnswers(
  api: PlanApi,
  state: ViewState,
  answers: AnswerItem[],
): Promise<ViewState> {
  const result = await api.draftAction(state.sessionId, state.selectedNode, {
    action: "elicit_and_regenerate",
    answers,
  });
  const next = await refreshTree(api, closeModal(state));
  return result.draft ? withDraft(next, result.draft) : next;
}

export async function iterate(
  api: PlanApi,
  state: ViewState,
  instruction: string,
): Promise<ViewState> {
  if (instruction.trim() === "") {
    return state;
  }
  const result = await api.draftAction(state.sessionId, state.selectedNode, {
    action: "iterate",
    instruction,
  });
  return result.draft ? withDraft(state, result.draft) : state;
}

/** Save marks the node complete server-side; the tree is re-fetched so the
 * completion icon comes from confirmed state, never assumed. */
export async function saveDraft(api: PlanApi, state: ViewState): Promise<ViewState> {
  await api.draftAction(state.sessionId, state.selectedNode, { action: "save" });
  return refreshTree(api, state);
}

export async function submitElicitation(
  api: PlanApi,
  state: ViewState,
  answers: AnswerItem[],
): Promise<ViewState> {
  await api.commitAnswers(state.sessionId, answers);
  const globalKeys = await api.listContext(state.sessionId, "global");
  return closeModal({ ...state, globalKeys, questions: [] });
}

export async function addContextEntry(
  api: PlanApi,
  state: ViewState,
  key: string,
  value: string,
): Promise<ViewState> {
  await api.addContext(state.sessionId, key, value);
  const localKeys = await api.listContext(state.sessionId, "local");
  return { ...state, localKeys };
}

/** 2-second polling target; also used after every mutation. */
export async function pollTree(api: PlanApi, state: ViewState): Promise<ViewState> {
  try {
    return await refreshTree(api, state);
  } catch {
    return state; // keep the last confirmed snapshot on transient failures
  }
}

export type { SelectionPurpose };
