import { describe, expect, it } from 'vitest'

import { applyCandidates, applySearch, beginSearch, clickToken,
         initialState, rejectCandidate, relationOfRule, sortCandidates,
         toggleSort, visibleCandidates } from '../src/state'
import type { CandidateInfo, SearchResponse } from '../src/types'

function searchResponse(keyword: string): SearchResponse {
  return { keyword, hits: [], similar: [], prefix: [] }
}

function candidate(id: string, count: number, pmi: number | null):
    CandidateInfo {
  return {
    rule_id: id, rule_text: `r(a, b) <= nsubj(c, a) & token(c, "${id}").`,
    extraction_count: count, overlap_count: 1, pmi,
  }
}

describe('search state', () => {
  it('discards responses of superseded requests', () => {
    const state = initialState()
    const first = beginSearch(state, 'killed')
    const second = beginSearch(state, 'murdered')
    expect(applySearch(state, first, searchResponse('killed'))).toBe(false)
    expect(state.search.response).toBeNull()
    expect(applySearch(state, second, searchResponse('murdered'))).toBe(true)
    expect(state.search.response?.keyword).toBe('murdered')
  })
})

describe('candidate panel', () => {
  it('sorts by pmi and by count, toggling between them', () => {
    const state = initialState()
    applyCandidates(state, 'killed', [
      candidate('low-pmi-high-count', 50, 0.1),
      candidate('high-pmi-low-count', 2, 2.5),
      candidate('no-pmi', 99, null),
    ])
    expect(state.candidates.sort).toBe('pmi')
    let visible = visibleCandidates(state)
    expect(visible[0].rule_id).toBe('high-pmi-low-count')
    expect(visible[2].rule_id).toBe('no-pmi')

    expect(toggleSort(state)).toBe('count')
    visible = visibleCandidates(state)
    expect(visible.map(c => c.rule_id)).toEqual(
      ['no-pmi', 'low-pmi-high-count', 'high-pmi-low-count'])

    expect(toggleSort(state)).toBe('pmi')
  })

  it('sortCandidates leaves the input untouched', () => {
    const list = [candidate('a', 1, 0.5), candidate('b', 2, 1.0)]
    const sorted = sortCandidates(list, 'pmi')
    expect(sorted.map(c => c.rule_id)).toEqual(['b', 'a'])
    expect(list.map(c => c.rule_id)).toEqual(['a', 'b'])
  })

  it('rejected candidates stay hidden for the session', () => {
    const state = initialState()
    applyCandidates(state, 'killed', [candidate('x', 5, 1), candidate('y', 4, 0.5)])
    rejectCandidate(state, 'x')
    expect(visibleCandidates(state).map(c => c.rule_id)).toEqual(['y'])
    // a re-run of the same iteration keeps the rejection
    applyCandidates(state, 'killed', [candidate('x', 5, 1), candidate('y', 4, 0.5)])
    state.candidates.rejected.add('x')
    expect(visibleCandidates(state).map(c => c.rule_id)).toEqual(['y'])
  })
})

describe('token selection', () => {
  it('keeps at most two selections, click order, with deselect', () => {
    const state = initialState()
    expect(clickToken(state, 2)).toEqual([2])
    expect(clickToken(state, 9)).toEqual([2, 9])
    expect(clickToken(state, 4)).toEqual([9, 4])  // oldest dropped
    expect(clickToken(state, 9)).toEqual([4])     // deselect
  })
})

describe('relationOfRule', () => {
  it('extracts the head predicate', () => {
    expect(relationOfRule('killed(a, b) <= nsubj(c, a).')).toBe('killed')
    expect(relationOfRule('not a rule')).toBeNull()
  })
})
