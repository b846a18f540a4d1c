/** Pure HTML renderers; no DOM access, so every view is testable as a string.
 *
 * The UI never recomputes scores or parses tuples; everything shown comes
 * verbatim from the API.
 */

import type { ApiDoc, ApiFinding, ApiHit, ApiLookupResult, ApiSearchPage } from "./types.js";
import type { ViewState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderFindingsTable(findings: ApiFinding[]): string {
  const rows = findings
    .map(
      (f) => `
      <tr data-role="finding-row">
        <td>${escapeHtml(f.intervention)}</td>
        <td>${escapeHtml(f.outcome)}</td>
        <td>${escapeHtml(f.comparator)}</td>
        <td class="label label-${f.label.replace(/\s+/g, "-")}">${escapeHtml(f.label)}</td>
      </tr>
      <tr class="evidence-row">
        <td colspan="4"><blockquote>${escapeHtml(f.evidence) || "<em>no evidence snippet</em>"}</blockquote></td>
      </tr>`,
    )
    .join("");
  return `
    <table class="findings" data-role="findings-table">
      <thead>
        <tr><th>Intervention</th><th>Outcome</th><th>Comparator</th><th>Result</th></tr>
      </thead>
      <tbody>${rows}</tbody>
    </table>`;
}

function pubmedLink(pmid: string): string {
  const safe = escapeHtml(pmid);
  return `<a href="https://pubmed.ncbi.nlm.nih.gov/${encodeURIComponent(pmid)}/"
             target="_blank" rel="noopener">PMID ${safe}</a>`;
}

export function renderHit(hit: ApiHit, expanded: boolean): string {
  const findingsBlock = expanded
    ? renderFindingsTable(hit.findings)
    : "";
  const caret = expanded ? "&#9662;" : "&#9656;";
  return `
  <article class="hit" data-role="hit" data-pmid="${escapeHtml(hit.pmid)}">
    <header>
      <button class="expand" data-action="toggle" data-pmid="${escapeHtml(hit.pmid)}"
              aria-expanded="${expanded}">${caret}</button>
      <h3>${escapeHtml(hit.title ?? "(untitled)")}</h3>
    </header>
    <p class="meta">
      ${pubmedLink(hit.pmid)}
      ${hit.pmcid ? `<span class="pmcid">${escapeHtml(hit.pmcid)}</span>` : ""}
      <span class="score">score ${hit.score.toFixed(4)}</span>
      <span class="count">${hit.findings.length} finding(s)</span>
    </p>
    <p class="snippet">${escapeHtml(hit.snippet)}</p>
    ${findingsBlock}
  </article>`;
}

export function renderResults(page: ApiSearchPage, state: ViewState): string {
  if (page.total_docs === 0) {
    return `<p class="empty" data-role="no-results">No results for &quot;${escapeHtml(page.query)}&quot;.</p>`;
  }
  const hits = page.hits.map((h) => renderHit(h, state.expanded.has(h.pmid))).join("\n");
  return `
  <p class="summary" data-role="summary">
    ${page.total_docs} document(s), page ${page.page} of ${page.total_pages}
  </p>
  ${hits}`;
}

export function renderPagination(page: number, totalPages: number): string {
  const prevDisabled = page <= 1 ? "disabled" : "";
  const nextDisabled = page >= totalPages ? "disabled" : "";
  return `
    <button data-action="prev" ${prevDisabled}>&larr; previous</button>
    <span data-role="page-indicator">${totalPages === 0 ? "&mdash;" : `${page} / ${totalPages}`}</span>
    <button data-action="next" ${nextDisabled}>next &rarr;</button>`;
}

export function renderLookupResults(result: ApiLookupResult, state: ViewState): string {
  const notice =
    result.missing.length > 0
      ? `<p class="notice" data-role="missing-ids">Not found: ${result.missing.map(escapeHtml).join(", ")}</p>`
      : "";
  if (result.found.length === 0) {
    return `${notice}<p class="empty" data-role="no-results">No documents matched the id list.</p>`;
  }
  const docs = result.found
    .map((doc) => renderHit(docAsHit(doc), state.expanded.has(doc.pmid)))
    .join("\n");
  return `${notice}
    <p class="summary" data-role="summary">${result.found.length} document(s) by id</p>
    ${docs}`;
}

function docAsHit(doc: ApiDoc): ApiHit {
  return {
    pmid: doc.pmid,
    score: 0,
    pmcid: doc.pmcid,
    title: doc.title,
    snippet: (doc.abstract ?? "").slice(0, 180),
    findings: doc.findings,
  };
}

export function renderError(message: string, retryable: boolean): string {
  const retry = retryable ? `<button data-action="retry">retry</button>` : "";
  return `<p class="error" data-role="error">${escapeHtml(message)} ${retry}</p>`;
}
