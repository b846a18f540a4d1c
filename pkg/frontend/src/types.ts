/** Shapes served by the findings search API. */

export interface ApiFinding {
  finding_id: number | null;
  intervention: string;
  outcome: string;
  comparator: string;
  evidence: string;
  label: string;
}

export interface ApiHit {
  pmid: string;
  score: number;
  pmcid: string | null;
  title: string | null;
  snippet: string;
  findings: ApiFinding[];
}

export interface ApiSearchPage {
  query: string;
  fields: string[];
  page: number;
  page_size: number;
  total_docs: number;
  total_pages: number;
  hits: ApiHit[];
}

export interface ApiDoc {
  pmid: string;
  pmcid: string | null;
  title: string | null;
  abstract: string | null;
  findings: ApiFinding[];
}

export interface ApiLookupResult {
  found: ApiDoc[];
  missing: string[];
}

export interface ApiError {
  error: string;
  detail: unknown;
}

export const SEARCHABLE_FIELDS = [
  "all",
  "abstract",
  "intervention",
  "outcome",
  "comparator",
  "evidence",
] as const;

export type SearchField = (typeof SEARCHABLE_FIELDS)[number];
