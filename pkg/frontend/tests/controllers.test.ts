import { describe, expect, it } from "vitest";

import {
  addContextAndRegenerate,
  confirmSelection,
  decomposeSelected,
  iterate,
  openNode,
  pollTree,
  regenerate,
  saveDraft,
  submitDraftAnswers,
  submitElicitation,
  workOnSelected,
} from "../src/controllers.js";
import { StubApi, selectionCandidates, stateFor } from "./helpers.js";

const DRAFT_PANE = { content: "old draft", revision: 1, pendingAction: null };

describe("the three refinement actions dispatch the right API calls", () => {
  it("Regenerate posts a regenerate draft action", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", { selectedNode: "n16", draftPane: DRAFT_PANE });
    const next = await regenerate(api, state);
    expect(api.callsTo("draftAction")).toHaveLength(1);
    expect(api.callsTo("draftAction")[0]!.args).toEqual([
      "s-test",
      "n16",
      { action: "regenerate", accepted_keys: [] },
    ]);
    expect(next.draftPane?.content).toBe("draft for n16");
  });

  it("Add Context and Regenerate elicits questions, then posts the answers", async () => {
    const api = new StubApi();
    api.draftResults = [
      { questions: [{ id: "q1", question: "Which paper?", expects_file: false, answer: null, answered: false }] },
      { draft: { node: "n16", content: "improved", context_keys_used: [], revision: 2, lineage: "regenerated_with_context" } },
    ];
    let state = stateFor("full_curation", { selectedNode: "n16", draftPane: DRAFT_PANE });

    state = await addContextAndRegenerate(api, state);
    expect(state.activeModal).toBe("draft_questions");
    expect(state.questions.map((q) => q.id)).toEqual(["q1"]);
    expect(api.callsTo("draftAction")[0]!.args[2]).toEqual({ action: "elicit_and_regenerate" });

    state = await submitDraftAnswers(api, state, [{ question_id: "q1", text: "the 2023 paper" }]);
    expect(api.callsTo("draftAction")[1]!.args[2]).toEqual({
      action: "elicit_and_regenerate",
      answers: [{ question_id: "q1", text: "the 2023 paper" }],
    });
    expect(state.activeModal).toBe("none");
    expect(state.draftPane?.content).toBe("improved");
    expect(state.draftPane?.revision).toBe(2);
  });

  it("Iterate sends the instruction and refuses an empty one", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", { selectedNode: "n16", draftPane: DRAFT_PANE });
    const unchanged = await iterate(api, state, "   ");
    expect(unchanged).toBe(state);
    expect(api.callsTo("draftAction")).toHaveLength(0);

    await iterate(api, state, "make it warmer");
    expect(api.callsTo("draftAction")[0]!.args[2]).toEqual({
      action: "iterate",
      instruction: "make it warmer",
    });
  });

  it("Save posts the save action and re-fetches the tree for the icon", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", { selectedNode: "n7", draftPane: DRAFT_PANE });
    await saveDraft(api, state);
    expect(api.callsTo("draftAction")[0]!.args[2]).toEqual({ action: "save" });
    expect(api.callsTo("getTree")).toHaveLength(1);
  });
});

describe("node opening and decomposition", () => {
  it("runs detection when a node is opened", async () => {
    const api = new StubApi();
    api.detection = { needs_decomposition: true, should_fork: false, reasoning: "broad" };
    const next = await openNode(api, stateFor(), "n2");
    expect(api.callsTo("detect")[0]!.args).toEqual(["s-test", "n2"]);
    expect(next.selectedNode).toBe("n2");
    expect(next.detection?.needs_decomposition).toBe(true);
  });

  it("degrades to a warning banner when detection fails", async () => {
    const api = new StubApi();
    api.failWith = new Error("503");
    const next = await openNode(api, stateFor(), "n2");
    expect(next.detection).toBeNull();
    expect(next.banner).toBe("recommendation unavailable");
  });

  it("plain decompose posts without keys", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", {
      selectedNode: "n2",
      detection: { needs_decomposition: true, should_fork: false, reasoning: "" },
    });
    await decomposeSelected(api, state);
    expect(api.callsTo("decompose")[0]!.args).toEqual(["s-test", "n2", undefined]);
  });

  it("fork recommendation routes through context selection", async () => {
    const api = new StubApi();
    let state = stateFor("full_curation", {
      selectedNode: "n8",
      detection: { needs_decomposition: true, should_fork: true, reasoning: "" },
    });
    state = await decomposeSelected(api, state);
    expect(api.callsTo("selectContext")[0]!.args).toEqual(["s-test", "n8", "forking"]);
    expect(state.activeModal).toBe("context_selection");
    expect(state.selectionPurpose).toBe("forking");

    state = await confirmSelection(api, state);
    expect(api.callsTo("decompose")[0]!.args).toEqual([
      "s-test",
      "n8",
      selectionCandidates().map((c) => c.key),
    ]);
    expect(state.activeModal).toBe("none");
  });
});

describe("working on a task", () => {
  it("full curation goes through drafting selection first", async () => {
    const api = new StubApi();
    let state = stateFor("full_curation", { selectedNode: "n16" });
    state = await workOnSelected(api, state);
    expect(api.callsTo("selectContext")[0]!.args).toEqual(["s-test", "n16", "drafting"]);
    expect(state.activeModal).toBe("context_selection");

    state = await confirmSelection(api, state);
    const body = api.callsTo("draftAction")[0]!.args[2];
    expect(body).toEqual({
      action: "generate",
      accepted_keys: selectionCandidates().map((c) => c.key),
    });
    expect(state.draftPane?.content).toBe("draft for n16");
  });

  it("reuse_only skips selection entirely", async () => {
    const api = new StubApi();
    const state = stateFor("reuse_only", { selectedNode: "n16" });
    const next = await workOnSelected(api, state);
    expect(api.callsTo("selectContext")).toHaveLength(0);
    expect(api.callsTo("draftAction")[0]!.args[2]).toEqual({
      action: "generate",
      accepted_keys: [],
    });
    expect(next.draftPane).not.toBeNull();
  });

  it("drafts immediately when there is no local context yet", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", { selectedNode: "n16", localKeys: [] });
    await workOnSelected(api, state);
    expect(api.callsTo("selectContext")).toHaveLength(0);
    expect(api.callsTo("draftAction")).toHaveLength(1);
  });
});

describe("no optimistic updates", () => {
  it("a failed mutation leaves the state untouched", async () => {
    const api = new StubApi();
    api.failWith = new Error("boom");
    const state = stateFor("full_curation", { selectedNode: "n7", draftPane: DRAFT_PANE });
    await expect(saveDraft(api, state)).rejects.toThrow("boom");
    expect(state.draftPane).toEqual(DRAFT_PANE);
    expect(state.tree.nodes["n7"]!.status).toBe("completed"); // unchanged fixture value
  });

  it("polling failures keep the last confirmed snapshot", async () => {
    const api = new StubApi();
    api.failWith = new Error("offline");
    const state = stateFor();
    const next = await pollTree(api, state);
    expect(next).toBe(state);
  });
});

describe("global elicitation", () => {
  it("submits answers then refreshes the global key list", async () => {
    const api = new StubApi();
    const state = stateFor("full_curation", { activeModal: "elicitation" });
    const next = await submitElicitation(api, state, [
      { question_id: "q1", text: "cv body", is_file: true },
      { question_id: "q2", text: "" },
    ]);
    expect(api.callsTo("commitAnswers")[0]!.args[1]).toEqual([
      { question_id: "q1", text: "cv body", is_file: true },
      { question_id: "q2", text: "" },
    ]);
    expect(api.callsTo("listContext")[0]!.args[1]).toBe("global");
    expect(next.activeModal).toBe("none");
    expect(next.questions).toEqual([]);
  });
});
