import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderActionPanel,
  renderChecklist,
  renderDraftPane,
  renderElicitationForm,
  renderOverview,
  renderTree,
} from "../src/views.js";
import {
  elicitationQuestions,
  selectionCandidates,
  stateFor,
  walkthroughTree,
} from "./helpers.js";

describe("renderTree", () => {
  it("matches the golden walkthrough snapshot", () => {
    const tree = walkthroughTree();
    expect(renderTree(tree, tree.root)).toMatchSnapshot();
  });

  it("groups fork siblings and marks them", () => {
    const tree = walkthroughTree();
    const html = renderTree(tree, tree.root);
    const forkGroups = html.match(/data-fork="true"/g) ?? [];
    expect(forkGroups).toHaveLength(2); // universities + recommenders
    expect(html).toContain("Reach Out to Potential Recommenders: Prof. Blake White");
  });

  it("shows a draft icon on every completed node with a saved draft", () => {
    const tree = walkthroughTree();
    const html = renderTree(tree, tree.root);
    const completedWithDraft = Object.values(tree.nodes).filter(
      (node) => node.status === "completed" && node.draft_ref !== null,
    );
    expect(completedWithDraft).toHaveLength(3);
    const icons = html.match(/class="draft-icon"/g) ?? [];
    expect(icons).toHaveLength(3);
  });

  it("indents by level", () => {
    const tree = walkthroughTree();
    const html = renderTree(tree, tree.root);
    expect(html).toContain('style="padding-left:0px"');
    expect(html).toContain('style="padding-left:48px"'); // level-3 fork children
  });

  it("marks the selected node", () => {
    const tree = walkthroughTree();
    const html = renderTree(tree, "n2");
    expect(html).toContain('data-node-id="n2" data-level="1" aria-selected="true"');
  });

  it("escapes untrusted titles", () => {
    const tree = walkthroughTree();
    const root = tree.nodes[tree.root]!;
    root.title = '<img src=x onerror="boom">';
    const html = renderTree(tree, tree.root);
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img");
  });

  it("renders an unknown status without crashing", () => {
    const tree = walkthroughTree();
    // Simulate a newer server sending a status this build does not know.
    (tree.nodes["n2"] as { status: string }).status = "archived";
    const html = renderTree(tree, tree.root);
    expect(html).toContain("status-archived");
  });
});

describe("renderActionPanel", () => {
  const node = walkthroughTree().nodes["n2"]!;

  it("highlights decompose when decomposition is recommended", () => {
    const html = renderActionPanel(node, {
      needs_decomposition: true,
      should_fork: false,
      reasoning: "too broad",
    });
    expect(html).toContain('data-action="decompose" class="action recommended"');
    expect(html).toContain('data-action="work" class="action"');
    expect(html).toContain("too broad");
  });

  it("highlights drafting when the task is actionable", () => {
    const html = renderActionPanel(node, {
      needs_decomposition: false,
      should_fork: false,
      reasoning: "",
    });
    expect(html).toContain('data-action="work" class="action recommended"');
  });

  it("keeps both actions enabled with a banner when detection failed", () => {
    const html = renderActionPanel(node, null);
    expect(html).toContain("warning-banner");
    expect(html).not.toContain("recommended");
    expect(html).not.toContain("disabled");
  });

  it("announces a fork recommendation", () => {
    const html = renderActionPanel(node, {
      needs_decomposition: true,
      should_fork: true,
      reasoning: "entities found",
    });
    expect(html).toContain("fork");
  });
});

describe("renderChecklist", () => {
  it("pre-checks the engine's suggested keys", () => {
    const state = stateFor("full_curation", {
      candidates: selectionCandidates(),
      activeModal: "context_selection",
    });
    const html = renderChecklist(state);
    const checked = html.match(/checked/g) ?? [];
    expect(checked).toHaveLength(2);
    expect(html).toContain("Compile a List of Recommenders — draft");
    expect(html).toContain("Research Universities and Programs — draft");
    expect(html).toMatchSnapshot();
  });

  it("offers the remaining local keys in a drop-down", () => {
    const state = stateFor("full_curation", {
      candidates: selectionCandidates().slice(0, 1),
      activeModal: "context_selection",
    });
    const html = renderChecklist(state);
    expect(html).toContain('data-role="add-key"');
    expect(html).toContain("Research Universities and Programs — draft</option>");
  });

  it("disables confirm for forking when nothing is accepted", () => {
    const none = selectionCandidates().map((c) => ({ ...c, accepted: false }));
    const state = stateFor("full_curation", {
      candidates: none,
      selectionPurpose: "forking",
      activeModal: "context_selection",
    });
    expect(renderChecklist(state)).toContain('data-action="confirm-selection" disabled');
  });

  it("keeps confirm enabled for drafting even with nothing accepted", () => {
    const none = selectionCandidates().map((c) => ({ ...c, accepted: false }));
    const state = stateFor("full_curation", {
      candidates: none,
      selectionPurpose: "drafting",
      activeModal: "context_selection",
    });
    expect(renderChecklist(state)).toContain('data-action="confirm-selection">');
  });
});

describe("renderDraftPane", () => {
  const pane = { content: "Dear Prof. Blake White,", revision: 2, pendingAction: null };

  it("shows all four actions in full curation", () => {
    const html = renderDraftPane(stateFor("full_curation", { draftPane: pane }));
    expect(html).toContain('data-action="regenerate"');
    expect(html).toContain('data-action="add-context-regenerate"');
    expect(html).toContain('data-action="iterate"');
    expect(html).toContain('data-action="save-draft"');
    expect(html).toContain("revision 2");
    expect(html).toMatchSnapshot();
  });

  it.each(["reuse_only", "selection_and_reuse"] as const)(
    "hides the elicitation-backed action in %s mode",
    (mode) => {
      const html = renderDraftPane(stateFor(mode, { draftPane: pane }));
      expect(html).not.toContain("add-context-regenerate");
      expect(html).toContain('data-action="regenerate"');
    },
  );

  it("starts with iterate disabled until an instruction is typed", () => {
    const html = renderDraftPane(stateFor("full_curation", { draftPane: pane }));
    expect(html).toContain('data-action="iterate" disabled');
  });

  it("renders nothing without a draft", () => {
    expect(renderDraftPane(stateFor())).toBe("");
  });
});

describe("renderElicitationForm", () => {
  it("uses a file input only where a document is requested", () => {
    const html = renderElicitationForm(elicitationQuestions(), "Tell us about your goal");
    const fileInputs = html.match(/type="file"/g) ?? [];
    const textareas = html.match(/<textarea/g) ?? [];
    expect(fileInputs).toHaveLength(1);
    expect(textareas).toHaveLength(2);
    expect(html).toContain("Let's get started");
    expect(html).toContain("(leave empty to skip)");
    expect(html).toMatchSnapshot();
  });
});

describe("renderOverview", () => {
  it("lists every subtask except the goal itself", () => {
    const tree = walkthroughTree();
    const html = renderOverview(tree);
    const items = html.match(/<li>/g) ?? [];
    expect(items).toHaveLength(Object.keys(tree.nodes).length - 1);
    expect(html).not.toContain("<strong>Apply for a PhD in NLP</strong>");
  });
});

describe("escapeHtml", () => {
  it("escapes the five metacharacters", () => {
    expect(escapeHtml(`<a href="x" title='y'>&</a>`)).toBe(
      "&lt;a href=&quot;x&quot; title=&#39;y&#39;&gt;&amp;&lt;/a&gt;",
    );
  });
});
