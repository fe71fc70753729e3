/**
 * DOM wiring for the playground.
 *
 * The editor panel (context declarations, active declaration, parameters)
 * writes into the PlaygroundState; the results panel is re-rendered from the
 * last response. Clicking a recommended invocation appends it to the active
 * declaration and resubmits, which is the playground's core steering loop.
 */

import { ApiClient, resolveBaseUrl, type RecommendResponse } from "./api.js";
import {
  appendInvocation,
  initialState,
  parseInvocationLines,
  setParam,
  toRequest,
  validate,
  type Params,
  type PlaygroundState,
} from "./state.js";
import { escapeHtml, renderResults } from "./render.js";

export interface App {
  state(): PlaygroundState;
  submit(): Promise<void>;
  appendAndResubmit(invocation: string): Promise<void>;
  addContextDeclaration(name?: string, invocations?: string[]): void;
  reset(): void;
}

const EDITOR_HTML = `
  <section class="editor">
    <h2>Context declarations</h2>
    <div id="context-list"></div>
    <button type="button" id="add-context">+ add declaration</button>
    <h2>Active declaration</h2>
    <label>name <input id="active-name" type="text" spellcheck="false"></label>
    <label>invocations (one per line)
      <textarea id="active-invocations" rows="6" spellcheck="false"></textarea>
    </label>
    <h2>Parameters</h2>
    <div class="params">
      <label>k <input id="param-k" type="number" min="1" max="100"></label>
      <label>M <input id="param-M" type="number" min="1" max="1000"></label>
      <label>N <input id="param-N" type="number" min="1" max="200"></label>
      <label>snippets <input id="param-snippetCount" type="number" min="1" max="50"></label>
    </div>
    <div class="actions">
      <button type="button" id="submit">Recommend</button>
      <button type="button" id="reset">Reset</button>
    </div>
  </section>
  <section class="results" id="results" aria-live="polite"></section>
`;

export function createApp(root: HTMLElement, client: ApiClient): App {
  let state = initialState();
  let submitSeq = 0;
  root.innerHTML = EDITOR_HTML;

  const el = <T extends HTMLElement>(selector: string): T => {
    const node = root.querySelector<T>(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node;
  };
  const contextList = el<HTMLDivElement>("#context-list");
  const activeName = el<HTMLInputElement>("#active-name");
  const activeInvocations = el<HTMLTextAreaElement>("#active-invocations");
  const results = el<HTMLElement>("#results");

  function syncEditorFromState(): void {
    activeName.value = state.active.name;
    activeInvocations.value = state.active.invocations.join("\n");
    for (const key of ["k", "M", "N", "snippetCount"] as (keyof Params)[]) {
      el<HTMLInputElement>(`#param-${key}`).value = String(state.params[key]);
    }
    contextList.innerHTML = "";
    state.context.forEach((decl, index) => {
      const row = root.ownerDocument.createElement("div");
      row.className = "context-row";
      row.innerHTML = `
        <label>name <input data-role="ctx-name" data-index="${index}" type="text"
          value="${escapeHtml(decl.name)}" spellcheck="false"></label>
        <label>invocations (one per line)
          <textarea data-role="ctx-invocations" data-index="${index}" rows="3"
            spellcheck="false">${escapeHtml(decl.invocations.join("\n"))}</textarea>
        </label>
        <button type="button" data-role="ctx-remove" data-index="${index}">remove</button>`;
      contextList.appendChild(row);
    });
  }

  function renderResultsPanel(): void {
    results.innerHTML = renderResults(state.lastResponse, state.inFlight, state.error);
  }

  async function submit(): Promise<void> {
    const problem = validate(state);
    if (problem) {
      state = { ...state, error: problem };
      renderResultsPanel();
      return;
    }
    const seq = ++submitSeq;
    state = { ...state, inFlight: true, error: null };
    renderResultsPanel();
    let response: RecommendResponse | null = null;
    let error: string | null = null;
    try {
      response = await client.recommend(toRequest(state));
    } catch (exc) {
      if (exc instanceof DOMException && exc.name === "AbortError") {
        return; // a newer submission owns the render
      }
      error = exc instanceof Error ? exc.message : String(exc);
    }
    if (seq !== submitSeq) {
      return; // stale: keep whatever the newer submission rendered
    }
    state = {
      ...state,
      inFlight: false,
      error,
      // on failure keep the previous results visible under the banner
      lastResponse: response ?? state.lastResponse,
    };
    renderResultsPanel();
  }

  async function appendAndResubmit(invocation: string): Promise<void> {
    state = appendInvocation(state, invocation);
    syncEditorFromState();
    await submit();
  }

  function addContextDeclaration(name = "", invocations: string[] = []): void {
    state = { ...state, context: [...state.context, { name, invocations }] };
    syncEditorFromState();
  }

  function reset(): void {
    state = initialState();
    submitSeq++;
    syncEditorFromState();
    renderResultsPanel();
  }

  activeName.addEventListener("input", () => {
    state = { ...state, active: { ...state.active, name: activeName.value } };
  });
  activeInvocations.addEventListener("input", () => {
    state = {
      ...state,
      active: { ...state.active, invocations: parseInvocationLines(activeInvocations.value) },
    };
  });
  for (const key of ["k", "M", "N", "snippetCount"] as (keyof Params)[]) {
    const input = el<HTMLInputElement>(`#param-${key}`);
    input.addEventListener("input", () => {
      state = setParam(state, key, Number(input.value));
    });
  }
  contextList.addEventListener("input", (event) => {
    const target = event.target as HTMLElement;
    const index = Number(target.dataset.index);
    const decl = state.context[index];
    if (!decl) return;
    const updated = [...state.context];
    if (target.dataset.role === "ctx-name") {
      updated[index] = { ...decl, name: (target as HTMLInputElement).value };
    } else if (target.dataset.role === "ctx-invocations") {
      updated[index] = {
        ...decl,
        invocations: parseInvocationLines((target as HTMLTextAreaElement).value),
      };
    }
    state = { ...state, context: updated };
  });
  contextList.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.role === "ctx-remove") {
      const index = Number(target.dataset.index);
      state = { ...state, context: state.context.filter((_, i) => i !== index) };
      syncEditorFromState();
    }
  });
  el<HTMLButtonElement>("#add-context").addEventListener("click", () => addContextDeclaration());
  el<HTMLButtonElement>("#submit").addEventListener("click", () => void submit());
  el<HTMLButtonElement>("#reset").addEventListener("click", reset);
  results.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLButtonElement>("button.invocation");
    if (target?.dataset.invocation) {
      void appendAndResubmit(target.dataset.invocation);
    }
  });

  syncEditorFromState();
  renderResultsPanel();
  return { state: () => state, submit, appendAndResubmit, addContextDeclaration, reset };
}

declare global {
  interface Window {
    __apirecApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const client = new ApiClient(resolveBaseUrl(window.location));
  window.__apirecApp = createApp(document.getElementById("app") as HTMLElement, client);
}
