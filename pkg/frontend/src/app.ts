/** DOM wiring: state in the URL, one in-flight request, stale results dropped. */

import { ApiClient, ApiRequestError } from "./api.js";
import {
  decodeState,
  encodeState,
  exportFileName,
  parseIdList,
  toggleExpanded,
  toggleField,
  type ViewState,
} from "./state.js";
import {
  renderError,
  renderLookupResults,
  renderPagination,
  renderResults,
} from "./render.js";
import { SEARCHABLE_FIELDS, type ApiLookupResult, type ApiSearchPage, type SearchField } from "./types.js";

const api = new ApiClient("");

let state: ViewState = decodeState(window.location.search);
let requestSeq = 0;
let lastPage: ApiSearchPage | null = null;
let lastLookup: ApiLookupResult | null = null;

const $ = <T extends HTMLElement>(selector: string): T => {
  const el = document.querySelector<T>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el;
};

function syncUrl(): void {
  const encoded = encodeState(state);
  const url = encoded ? `?${encoded}` : window.location.pathname;
  window.history.replaceState(null, "", url);
}

function syncControls(): void {
  $<HTMLInputElement>("#query").value = state.query;
  $<HTMLSelectElement>("#mode").value = state.mode;
  for (const field of SEARCHABLE_FIELDS) {
    const box = document.querySelector<HTMLInputElement>(`input[data-field="${field}"]`);
    if (box) box.checked = state.fields.includes(field);
  }
  $<HTMLElement>("#field-boxes").style.display = state.mode === "search" ? "" : "none";
  const exportButton = $<HTMLButtonElement>("#export");
  exportButton.disabled = state.query.trim().length === 0;
}

function renderCurrent(): void {
  const results = $("#results");
  const pagination = $("#pagination");
  if (state.mode === "ids") {
    results.innerHTML = lastLookup ? renderLookupResults(lastLookup, state) : "";
    pagination.innerHTML = "";
  } else {
    results.innerHTML = lastPage ? renderResults(lastPage, state) : "";
    pagination.innerHTML = lastPage
      ? renderPagination(lastPage.page, lastPage.total_pages)
      : "";
  }
}

async function refresh(): Promise<void> {
  syncControls();
  syncUrl();
  if (!state.query.trim()) {
    lastPage = null;
    lastLookup = null;
    renderCurrent();
    return;
  }
  const seq = ++requestSeq;
  try {
    if (state.mode === "ids") {
      const result = await api.lookup(parseIdList(state.query));
      if (seq !== requestSeq) return; // stale response
      lastLookup = result;
    } else {
      const page = await api.search(state.query, state.fields, state.page);
      if (seq !== requestSeq) return; // stale response
      lastPage = page;
      // the server may report fewer pages than the requested one
      if (page.total_pages > 0 && state.page > page.total_pages) {
        state = { ...state, page: page.total_pages };
        void refresh();
        return;
      }
    }
    renderCurrent();
  } catch (error) {
    if (seq !== requestSeq) return;
    const retryable = !(error instanceof ApiRequestError) || error.status >= 500;
    const message = error instanceof Error ? error.message : String(error);
    $("#results").innerHTML = renderError(message, retryable);
    $("#pagination").innerHTML = "";
  }
}

async function downloadExport(): Promise<void> {
  const exportButton = $<HTMLButtonElement>("#export");
  exportButton.disabled = true;
  try {
    const csv = await api.exportCsv(state);
    const blob = new Blob([csv], { type: "text/csv" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = exportFileName(state);
    link.click();
    URL.revokeObjectURL(link.href);
    if (state.mode === "ids" && lastLookup && lastLookup.missing.length > 0) {
      $("#notices").innerHTML =
        `<p class="notice">Export done; ids not found: ${lastLookup.missing.join(", ")}</p>`;
    }
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    $("#notices").innerHTML = renderError(message, false);
  } finally {
    exportButton.disabled = state.query.trim().length === 0;
  }
}

function bind(): void {
  $<HTMLFormElement>("#search-form").addEventListener("submit", (event) => {
    event.preventDefault();
    state = { ...state, query: $<HTMLInputElement>("#query").value, page: 1 };
    void refresh();
  });

  $<HTMLSelectElement>("#mode").addEventListener("change", (event) => {
    const mode = (event.target as HTMLSelectElement).value === "ids" ? "ids" : "search";
    state = { ...state, mode, page: 1 };
    void refresh();
  });

  $("#field-boxes").addEventListener("change", (event) => {
    const box = event.target as HTMLInputElement;
    const field = box.dataset.field as SearchField | undefined;
    if (!field) return;
    state = toggleField(state, field);
    void refresh();
  });

  $("#export").addEventListener("click", () => void downloadExport());

  document.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action;
    if (action === "toggle" && target.dataset.pmid) {
      state = toggleExpanded(state, target.dataset.pmid);
      renderCurrent();
    } else if (action === "prev" && state.page > 1) {
      state = { ...state, page: state.page - 1 };
      void refresh();
    } else if (action === "next") {
      state = { ...state, page: state.page + 1 };
      void refresh();
    } else if (action === "retry") {
      void refresh();
    }
  });
}

bind();
void refresh();
