/**
 * Pure HTML renderers. Every view is a function from data to a markup
 * string; the bootstrap layer owns the DOM and event wiring. Keeping views
 * pure makes them snapshot-testable without a browser.
 */

import type {
  DetectResult,
  ElicitationQuestion,
  SelectionCandidate,
  TaskNodeSnapshot,
  TreeSnapshot,
} from "./api.js";
import type { ViewState } from "./state.js";
import { acceptedKeys, remainingLocalKeys } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const DRAFT_ICON = '<span class="draft-icon" title="saved draft" aria-label="saved draft">📄</span>';

function renderNode(tree: TreeSnapshot, nodeId: string, selected: string): string {
  const node = tree.nodes[nodeId];
  if (node === undefined) {
    return "";
  }
  const classes = ["node-row", `status-${node.status}`];
  if (nodeId === selected) {
    classes.push("selected");
  }
  const icon = node.status === "completed" && node.draft_ref !== null ? ` ${DRAFT_ICON}` : "";
  const label =
    `<span class="node-title">${escapeHtml(node.title)}</span>` +
    `<span class="node-duration">${escapeHtml(node.estimated_duration)}</span>${icon}`;
  let children = "";
  if (node.children.length > 0) {
    const group = node.decomposition === "fork" ? ' class="fork-group" data-fork="true"' : "";
    const items = node.children.map((child) => renderNode(tree, child, selected)).join("");
    children = `<ul role="group"${group}>${items}</ul>`;
  }
  return (
    `<li role="treeitem" data-node-id="${escapeHtml(nodeId)}" data-level="${node.level}"` +
    ` aria-selected="${nodeId === selected}" aria-expanded="${node.children.length > 0}">` +
    `<div class="${classes.join(" ")}" style="padding-left:${node.level * 16}px" tabindex="-1">` +
    `${label}</div>${children}</li>`
  );
}

/** The task tree: indentation by level, draft icons on completed nodes,
 * fork siblings wrapped in a marked group. */
export function renderTree(tree: TreeSnapshot, selected: string): string {
  return `<ul class="tree" role="tree" aria-label="task tree">${renderNode(
    tree,
    tree.root,
    selected,
  )}</ul>`;
}

/** Decompose / draft buttons with the detector's recommendation highlighted.
 * A failed detection (null) leaves both enabled with a warning banner. */
export function renderActionPanel(node: TaskNodeSnapshot, detection: DetectResult | null): string {
  const decomposeClasses = ["action"];
  const draftClasses = ["action"];
  if (detection?.needs_decomposition === true) {
    decomposeClasses.push("recommended");
  }
  if (detection?.needs_decomposition === false) {
    draftClasses.push("recommended");
  }
  const banner =
    detection === null
      ? '<p class="warning-banner" role="alert">The recommendation service is unavailable; both actions remain available.</p>'
      : `<p class="detection-reasoning">${escapeHtml(detection.reasoning)}</p>`;
  const forkNote =
    detection?.should_fork === true
      ? '<p class="fork-note">Decomposing will fork this task into parallel subtasks.</p>'
      : "";
  return (
    `<section class="action-panel" aria-label="node actions">` +
    `<h2>${escapeHtml(node.title)}</h2>` +
    `<p class="node-description">${escapeHtml(node.description)}</p>` +
    banner +
    forkNote +
    `<button type="button" data-action="decompose" class="${decomposeClasses.join(" ")}">Decompose the task</button>` +
    `<button type="button" data-action="work" class="${draftClasses.join(" ")}">Work on this task</button>` +
    `</section>`
  );
}

/** Context checklist: suggested keys pre-checked, a drop-down for the rest.
 * For forking the confirm button needs at least one accepted key. */
export function renderChecklist(state: ViewState): string {
  const candidates = state.candidates;
  const rows = candidates
    .map((candidate: SelectionCandidate) => {
      const checked = candidate.accepted ? " checked" : "";
      return (
        `<label class="candidate"><input type="checkbox" data-candidate-key="${escapeHtml(
          candidate.key,
        )}"${checked}> <span class="candidate-key">${escapeHtml(candidate.key)}</span>` +
        ` <span class="candidate-reason">${escapeHtml(candidate.reason)}</span></label>`
      );
    })
    .join("");
  const remaining = remainingLocalKeys(state);
  const options = remaining
    .map((key) => `<option value="${escapeHtml(key)}">${escapeHtml(key)}</option>`)
    .join("");
  const dropdown =
    remaining.length > 0
      ? `<select data-role="add-key" aria-label="add context"><option value="">Add context…</option>${options}</select>`
      : "";
  const confirmDisabled =
    state.selectionPurpose === "forking" && acceptedKeys(state).length === 0 ? " disabled" : "";
  return (
    `<section class="modal context-selection" role="dialog" aria-label="context selection">` +
    `<h2>Relevant context</h2>${rows}${dropdown}` +
    `<button type="button" data-action="confirm-selection"${confirmDisabled}>Confirm</button>` +
    `<button type="button" data-action="cancel-modal">Cancel</button>` +
    `</section>`
  );
}

/** Draft editor with the three refinement actions plus save. The
 * elicitation-backed action only exists in full curation mode. */
export function renderDraftPane(state: ViewState): string {
  const pane = state.draftPane;
  if (pane === null) {
    return "";
  }
  const addContext =
    state.mode === "full_curation"
      ? `<button type="button" data-action="add-context-regenerate">Add Context and Regenerate</button>`
      : "";
  return (
    `<section class="draft-pane" aria-label="answer draft">` +
    `<h3>Draft (revision ${pane.revision})</h3>` +
    `<pre class="draft-content">${escapeHtml(pane.content)}</pre>` +
    `<div class="draft-actions">` +
    `<button type="button" data-action="regenerate">Regenerate</button>` +
    addContext +
    `<input type="text" data-role="iterate-instruction" aria-label="iteration instruction" placeholder="How should it change?">` +
    `<button type="button" data-action="iterate" disabled>Iterate</button>` +
    `<button type="button" data-action="save-draft">Save</button>` +
    `</div></section>`
  );
}

/** Elicitation form: text inputs, or file inputs where a document is asked
 * for; every question may be skipped. */
export function renderElicitationForm(questions: ElicitationQuestion[], heading: string): string {
  const rows = questions
    .map((question) => {
      const input = question.expects_file
        ? `<input type="file" data-question-id="${escapeHtml(question.id)}" aria-label="${escapeHtml(question.question)}">`
        : `<textarea data-question-id="${escapeHtml(question.id)}" aria-label="${escapeHtml(question.question)}" rows="2"></textarea>`;
      return (
        `<div class="question"><label>${escapeHtml(question.question)}` +
        `<span class="skip-hint">(leave empty to skip)</span></label>${input}</div>`
      );
    })
    .join("");
  return (
    `<section class="modal elicitation" role="dialog" aria-label="${escapeHtml(heading)}">` +
    `<h2>${escapeHtml(heading)}</h2>${rows}` +
    `<button type="button" data-action="submit-elicitation">Let's get started</button>` +
    `</section>`
  );
}

/** Flat read-only overview of every subtask (title, description, duration). */
export function renderOverview(tree: TreeSnapshot): string {
  const rows = Object.values(tree.nodes)
    .filter((node) => node.id !== tree.root)
    .map(
      (node) =>
        `<li><strong>${escapeHtml(node.title)}</strong> — ${escapeHtml(node.description)}` +
        ` <em>(${escapeHtml(node.estimated_duration)})</em></li>`,
    )
    .join("");
  return `<ul class="overview" aria-label="subtask overview">${rows}</ul>`;
}

export function renderBanner(state: ViewState): string {
  if (state.banner === null) {
    return "";
  }
  return `<p class="warning-banner" role="alert">${escapeHtml(state.banner)}</p>`;
}
