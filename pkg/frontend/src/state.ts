// Panel state and the transitions the UI performs on it.  All counts come
// from the service; the state only records what was rendered and which
// ruleset version it belongs to, so stale responses can be discarded.

import type {
  CandidateInfo, RuleInfo, SearchResponse, SentenceView,
} from './types'

export type SortOrder = 'pmi' | 'count'

export interface PanelState {
  search: {
    query: string
    requestSeq: number
    response: SearchResponse | null
  }
  rules: {
    version: string
    list: RuleInfo[]
  }
  candidates: {
    relation: string | null
    sort: SortOrder
    list: CandidateInfo[]
    rejected: Set<string>
    running: boolean
  }
  inspector: {
    view: SentenceView | null
    selected: number[]   // clicked token offsets, at most two
  }
  error: string | null
}

export function initialState(): PanelState {
  return {
    search: { query: '', requestSeq: 0, response: null },
    rules: { version: '', list: [] },
    candidates: {
      relation: null, sort: 'pmi', list: [], rejected: new Set(),
      running: false,
    },
    inspector: { view: null, selected: [] },
    error: null,
  }
}

export function beginSearch(state: PanelState, query: string): number {
  state.search.query = query
  state.search.requestSeq += 1
  return state.search.requestSeq
}

/** Apply a search response only if it answers the latest request. */
export function applySearch(state: PanelState, seq: number,
                            response: SearchResponse): boolean {
  if (seq !== state.search.requestSeq) return false
  state.search.response = response
  return true
}

export function applyRules(state: PanelState, version: string,
                           rules: RuleInfo[]): void {
  state.rules.version = version
  state.rules.list = rules
}

export function applyCandidates(state: PanelState, relation: string,
                                candidates: CandidateInfo[]): void {
  state.candidates.relation = relation
  state.candidates.list = candidates
  state.candidates.running = false
}

export function visibleCandidates(state: PanelState): CandidateInfo[] {
  const { list, rejected, sort } = state.candidates
  const kept = list.filter(c => !rejected.has(c.rule_id))
  return sortCandidates(kept, sort)
}

export function sortCandidates(list: CandidateInfo[],
                               sort: SortOrder): CandidateInfo[] {
  const copy = [...list]
  if (sort === 'count') {
    copy.sort((a, b) => b.extraction_count - a.extraction_count
      || cmpText(a, b))
  } else {
    copy.sort((a, b) => (score(b) - score(a))
      || (b.extraction_count - a.extraction_count) || cmpText(a, b))
  }
  return copy
}

function score(c: CandidateInfo): number {
  return c.pmi === null ? Number.NEGATIVE_INFINITY : c.pmi
}

function cmpText(a: CandidateInfo, b: CandidateInfo): number {
  return a.rule_text < b.rule_text ? -1 : a.rule_text > b.rule_text ? 1 : 0
}

export function toggleSort(state: PanelState): SortOrder {
  state.candidates.sort = state.candidates.sort === 'pmi' ? 'count' : 'pmi'
  return state.candidates.sort
}

export function rejectCandidate(state: PanelState, ruleId: string): void {
  state.candidates.rejected.add(ruleId)
}

export function removeCandidate(state: PanelState, ruleId: string): void {
  state.candidates.list = state.candidates.list.filter(
    c => c.rule_id !== ruleId)
}

/** Token clicks select at most two argument positions, in click order;
 *  clicking a selected token deselects it. */
export function clickToken(state: PanelState, offset: number): number[] {
  const selected = state.inspector.selected
  const at = selected.indexOf(offset)
  if (at >= 0) {
    selected.splice(at, 1)
  } else {
    selected.push(offset)
    if (selected.length > 2) selected.shift()
  }
  return [...selected]
}

export function relationOfRule(ruleText: string): string | null {
  const m = /^([A-Za-z_][A-Za-z0-9_]*)\s*\(/.exec(ruleText)
  return m ? m[1] : null
}
