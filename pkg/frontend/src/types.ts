// Payload shapes of the curation service JSON API.

export interface Differentia {
  characteristic: string;
  value: string;
}

export interface TaxonomyNode {
  node_id: string;
  parent: string | null;
  children: string[];
  differentia: Differentia | null;
  rank: number;
  rank_label: string | null;
  basic_category: boolean;
  sc_ref: string;
  media_refs: string[];
  intension: Record<string, string>;
  concept_id: number | null;
  lemmas: Record<string, string>;
}

export interface TaxonomyResponse {
  revision: string;
  root: string | null;
  purpose: string | null;
  nodes: TaxonomyNode[];
}

export interface DecisionTemplate {
  kind: string;
  payload: Record<string, unknown>;
}

export interface Violation {
  canon: string;
  location: string;
  severity: "error" | "warning";
  explanation: string;
  suggested_fixes: DecisionTemplate[];
}

export interface AuditReport {
  audited_at: number;
  counts: Record<string, number>;
  errors: number;
  warnings: number;
  stats: Record<string, unknown>;
  violations: Violation[];
}

export interface ViolationsResponse {
  revision: string;
  report: AuditReport;
}

export interface MergeCandidate {
  sc_id: string;
  score: number;
}

export interface PendingMerge {
  percept_id: string;
  signature: Record<string, string>;
  candidates: MergeCandidate[];
}

export interface PendingResponse {
  revision: string;
  pending: PendingMerge[];
}

export interface SuccessionCandidate {
  name: string;
  partition_count: number;
  passes: boolean;
  gate: Violation[];
}

export interface CandidatesResponse {
  revision: string;
  purpose_id: string;
  candidates: SuccessionCandidate[];
}

export interface ProjectionNode {
  parent: string | null;
  children: string[];
  lemmas: string[];
  gloss: string;
}

export interface ProjectionResponse {
  revision: string;
  language: string;
  root: string;
  nodes: Record<string, ProjectionNode>;
}

export interface ConceptRow {
  concept_id: number;
  node_ref: string;
  mapped_sc: string | null;
}

export interface ExportDocument {
  concepts: { concepts: ConceptRow[]; next_id: number };
  [key: string]: unknown;
}

export interface DecisionResult {
  revision: string;
  decision_id: string;
  errors: number;
  warnings: number;
}
