/** View state and its URL encoding; query, fields, mode, and page deep-link. */

import { SEARCHABLE_FIELDS, type SearchField } from "./types.js";

export type Mode = "search" | "ids";

export interface ViewState {
  mode: Mode;
  query: string;
  fields: SearchField[];
  page: number;
  expanded: Set<string>;
}

export function initialState(): ViewState {
  return { mode: "search", query: "", fields: ["all"], page: 1, expanded: new Set() };
}

function isField(value: string): value is SearchField {
  return (SEARCHABLE_FIELDS as readonly string[]).includes(value);
}

/** Encode the shareable parts of the state (expansion is session-local). */
export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.mode !== "search") params.set("mode", state.mode);
  if (!(state.fields.length === 1 && state.fields[0] === "all")) {
    params.set("fields", state.fields.join(","));
  }
  if (state.page !== 1) params.set("page", String(state.page));
  return params.toString();
}

export function decodeState(search: string): ViewState {
  const params = new URLSearchParams(search);
  const state = initialState();
  state.query = params.get("q") ?? "";
  state.mode = params.get("mode") === "ids" ? "ids" : "search";
  const rawFields = (params.get("fields") ?? "")
    .split(",")
    .map((f) => f.trim())
    .filter(isField);
  if (rawFields.length > 0) state.fields = rawFields;
  const page = Number(params.get("page") ?? "1");
  state.page = Number.isInteger(page) && page >= 1 ? page : 1;
  return state;
}

export function toggleField(state: ViewState, field: SearchField): ViewState {
  let fields: SearchField[];
  if (field === "all") {
    fields = ["all"];
  } else {
    const without = state.fields.filter((f) => f !== "all");
    fields = without.includes(field)
      ? without.filter((f) => f !== field)
      : [...without, field];
    if (fields.length === 0) fields = ["all"];
  }
  return { ...state, fields, page: 1 };
}

export function toggleExpanded(state: ViewState, pmid: string): ViewState {
  const expanded = new Set(state.expanded);
  if (expanded.has(pmid)) expanded.delete(pmid);
  else expanded.add(pmid);
  return { ...state, expanded };
}

/** Parsed id list for lookup mode (comma/space/newline separated). */
export function parseIdList(query: string): string[] {
  return query
    .split(/[\s,]+/)
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}

export function exportFileName(state: ViewState, now: Date = new Date()): string {
  const stamp = now.toISOString().replace(/[:T]/g, "-").slice(0, 19);
  const slug =
    (state.mode === "ids" ? "ids-" : "") +
    (state.query.trim().replace(/[^A-Za-z0-9]+/g, "_").slice(0, 40) || "findings");
  return `${slug}-${stamp}.csv`;
}
