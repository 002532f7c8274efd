// Shapes of the workbench service's JSON payloads (v1 API).

export interface SearchHit {
  sentence_id: number
  doc_id: string
  text: string
}

export interface SimilarSuggestion {
  word: string
  score: number
  occurrences: number
}

export interface PrefixSuggestion {
  word: string
  occurrences: number
}

export interface SearchResponse {
  keyword: string
  hits: SearchHit[]
  similar: SimilarSuggestion[]
  prefix: PrefixSuggestion[]
}

export interface RuleInfo {
  rule_id: string
  text: string
  comment: string
  sample_sentence_id: number | null
  count: number
  seconds?: number
}

export interface RuleListResponse {
  ruleset: string
  version: string
  rules: RuleInfo[]
}

export interface CandidateInfo {
  rule_id: string
  rule_text: string
  extraction_count: number
  overlap_count: number
  pmi: number | null
}

export interface BootstrapJob {
  status: string
  candidates?: CandidateInfo[]
  matches?: number
  skipped_no_path?: number
}

export interface TokenView {
  offset: number
  surface: string
  lemma: string
  tag: string
}

export interface DepView {
  label: string
  head: number
  dependent: number
}

export interface EntityView {
  etype: string
  start: number
  end: number
  source: string
}

export interface SentenceView {
  sentence_id: number
  doc_id: string
  tokens: TokenView[]
  deps: DepView[]
  entities: EntityView[]
  corefs: { cluster_id: number; spans: [number, number][] }[]
}

export interface GeneralizePreview {
  rule_id: string
  generalized: string
  accepted?: boolean
  new_rule_id?: string
}

export interface ApiError {
  status: number
  detail: string
}
