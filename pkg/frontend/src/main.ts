/**
 * DOM bootstrap: wires the pure views and controllers to the page.
 *
 * One in-flight mutating request at a time; the tree is re-polled every two
 * seconds. All user actions go through `dispatch`, which serializes them.
 */

import { HttpPlanApi, type AblationMode, type AnswerItem, type PlanApi } from "./api.js";
import {
  addCandidate,
  initialState,
  moveSelection,
  outlineOrder,
  toggleCandidate,
  type ViewState,
} from "./state.js";
import * as controllers from "./controllers.js";
import {
  renderActionPanel,
  renderBanner,
  renderChecklist,
  renderDraftPane,
  renderElicitationForm,
  renderOverview,
  renderTree,
} from "./views.js";

const POLL_INTERVAL_MS = 2000;

interface App {
  api: PlanApi;
  state: ViewState | null;
  busy: boolean;
}

const app: App = { api: new HttpPlanApi(""), state: null, busy: false };

function render(): void {
  const state = app.state;
  const rootElement = document.getElementById("app");
  if (rootElement === null) {
    return;
  }
  if (state === null) {
    rootElement.querySelector(".workspace")?.classList.add("hidden");
    return;
  }
  rootElement.querySelector(".goal-form")?.classList.add("hidden");
  rootElement.querySelector(".workspace")?.classList.remove("hidden");

  const treeElement = document.getElementById("tree");
  if (treeElement !== null) {
    treeElement.innerHTML = renderTree(state.tree, state.selectedNode);
  }
  const panelElement = document.getElementById("panel");
  if (panelElement !== null) {
    const node = state.tree.nodes[state.selectedNode];
    panelElement.innerHTML =
      renderBanner(state) +
      (node === undefined ? "" : renderActionPanel(node, state.detection)) +
      renderDraftPane(state);
  }
  const overviewElement = document.getElementById("overview");
  if (overviewElement !== null) {
    overviewElement.innerHTML = renderOverview(state.tree);
  }
  const modalElement = document.getElementById("modal");
  if (modalElement !== null) {
    if (state.activeModal === "context_selection") {
      modalElement.innerHTML = renderChecklist(state);
    } else if (state.activeModal === "elicitation") {
      modalElement.innerHTML = renderElicitationForm(state.questions, "Tell us about your goal");
    } else if (state.activeModal === "draft_questions") {
      modalElement.innerHTML = renderElicitationForm(state.questions, "Improve this draft");
    } else {
      modalElement.innerHTML = "";
    }
  }
  syncIterateButton();
}

function syncIterateButton(): void {
  const input = document.querySelector<HTMLInputElement>('[data-role="iterate-instruction"]');
  const button = document.querySelector<HTMLButtonElement>('[data-action="iterate"]');
  if (input !== null && button !== null) {
    button.disabled = input.value.trim() === "";
  }
}

/** Serialize mutations: ignore re-entrant actions while one is in flight. */
async function dispatch(work: (state: ViewState) => Promise<ViewState>): Promise<void> {
  if (app.busy || app.state === null) {
    return;
  }
  app.busy = true;
  try {
    app.state = await work(app.state);
  } catch (error) {
    app.state = { ...app.state, banner: error instanceof Error ? error.message : String(error) };
  } finally {
    app.busy = false;
    render();
  }
}

function collectAnswers(container: ParentNode): Promise<AnswerItem[]> {
  const inputs = container.querySelectorAll<HTMLElement>("[data-question-id]");
  const answers: Promise<AnswerItem>[] = [];
  for (const element of inputs) {
    const questionId = element.dataset["questionId"] ?? "";
    if (element instanceof HTMLTextAreaElement) {
      answers.push(Promise.resolve({ question_id: questionId, text: element.value }));
    } else if (element instanceof HTMLInputElement && element.type === "file") {
      const file = element.files?.[0];
      answers.push(
        file === undefined
          ? Promise.resolve({ question_id: questionId, text: "" })
          : file.text().then((text) => ({ question_id: questionId, text, is_file: true })),
      );
    }
  }
  return Promise.all(answers);
}

function onClick(event: MouseEvent): void {
  const target = event.target;
  if (!(target instanceof Element)) {
    return;
  }
  const row = target.closest<HTMLElement>("[data-node-id]");
  if (row !== null && target.closest("[data-action]") === null) {
    void dispatch((state) => controllers.openNode(app.api, state, row.dataset["nodeId"] ?? ""));
    return;
  }
  const actionElement = target.closest<HTMLElement>("[data-action]");
  if (actionElement === null) {
    return;
  }
  const action = actionElement.dataset["action"];
  if (action === "decompose") {
    void dispatch((state) => controllers.decomposeSelected(app.api, state));
  } else if (action === "work") {
    void dispatch((state) => controllers.workOnSelected(app.api, state));
  } else if (action === "confirm-selection") {
    void dispatch((state) => controllers.confirmSelection(app.api, state));
  } else if (action === "cancel-modal") {
    void dispatch((state) => Promise.resolve({ ...state, activeModal: "none" as const }));
  } else if (action === "regenerate") {
    void dispatch((state) => controllers.regenerate(app.api, state));
  } else if (action === "add-context-regenerate") {
    void dispatch((state) => controllers.addContextAndRegenerate(app.api, state));
  } else if (action === "iterate") {
    const input = document.querySelector<HTMLInputElement>('[data-role="iterate-instruction"]');
    const instruction = input?.value ?? "";
    void dispatch((state) => controllers.iterate(app.api, state, instruction));
  } else if (action === "save-draft") {
    void dispatch((state) => controllers.saveDraft(app.api, state));
  } else if (action === "submit-elicitation") {
    const modal = actionElement.closest(".modal");
    if (modal !== null && app.state !== null) {
      const isDraftModal = app.state.activeModal === "draft_questions";
      void collectAnswers(modal).then((answers) =>
        dispatch((state) =>
          isDraftModal
            ? controllers.submitDraftAnswers(app.api, state, answers)
            : controllers.submitElicitation(app.api, state, answers),
        ),
      );
    }
  }
}

function onChange(event: Event): void {
  const target = event.target;
  if (target instanceof HTMLInputElement && target.dataset["candidateKey"] !== undefined) {
    if (app.state !== null) {
      app.state = toggleCandidate(app.state, target.dataset["candidateKey"]);
      render();
    }
  } else if (target instanceof HTMLSelectElement && target.dataset["role"] === "add-key") {
    if (app.state !== null && target.value !== "") {
      app.state = addCandidate(app.state, target.value);
      render();
    }
  }
}

function onKeyDown(event: KeyboardEvent): void {
  if (app.state === null || app.state.activeModal !== "none") {
    return;
  }
  const editing = document.activeElement;
  if (editing instanceof HTMLInputElement || editing instanceof HTMLTextAreaElement) {
    return;
  }
  if (event.key === "ArrowDown" || event.key === "ArrowUp") {
    event.preventDefault();
    app.state = moveSelection(app.state, event.key === "ArrowDown" ? 1 : -1);
    render();
  } else if (event.key === "Enter") {
    event.preventDefault();
    void dispatch((state) => controllers.openNode(app.api, state, state.selectedNode));
  } else if (event.key === "Home") {
    const order = outlineOrder(app.state.tree);
    const first = order[0];
    if (first !== undefined) {
      void dispatch((state) => controllers.openNode(app.api, state, first));
    }
  }
}

async function startSession(goal: string, mode: AblationMode): Promise<void> {
  const created = await app.api.createSession(goal, mode);
  const tree = await app.api.getTree(created.session_id);
  app.state = initialState(created.session_id, mode, tree, created.questions);
  render();
}

function bindGoalForm(): void {
  const form = document.querySelector<HTMLFormElement>(".goal-form");
  form?.addEventListener("submit", (event) => {
    event.preventDefault();
    const goalInput = form.querySelector<HTMLInputElement>('input[name="goal"]');
    const modeSelect = form.querySelector<HTMLSelectElement>('select[name="mode"]');
    const goal = goalInput?.value.trim() ?? "";
    if (goal === "") {
      return;
    }
    void startSession(goal, (modeSelect?.value ?? "full_curation") as AblationMode);
  });
}

export function boot(): void {
  bindGoalForm();
  document.addEventListener("click", onClick);
  document.addEventListener("change", onChange);
  document.addEventListener("input", syncIterateButton);
  document.addEventListener("keydown", onKeyDown);
  setInterval(() => {
    if (app.state !== null && !app.busy && app.state.activeModal === "none") {
      void dispatch((state) => controllers.pollTree(app.api, state));
    }
  }, POLL_INTERVAL_MS);
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  boot();
}
