// Wires the four panels to the service: search and inspect sentences, edit
// rules, review bootstrap candidates, watch counts refresh.

import { ServiceError, WorkbenchClient } from './api'
import { renderCandidates, renderError, renderRules, renderSearch,
         renderSentence } from './render'
import { applyCandidates, applyRules, applySearch, beginSearch, clickToken,
         initialState, rejectCandidate, removeCandidate, toggleSort,
         visibleCandidates } from './state'

const state = initialState()
const client = new WorkbenchClient('')

function panel(id: string): HTMLElement {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing panel #${id}`)
  return node
}

const searchPanel = panel('search-results')
const rulePanel = panel('rule-list')
const candidatePanel = panel('candidate-list')
const inspectorPanel = panel('sentence-inspector')
const errorBox = panel('error-box')

function showError(err: unknown): void {
  state.error = err instanceof ServiceError
    ? `${err.status}: ${err.message}`
    : String(err)
  renderError(errorBox, state.error)
}

function clearError(): void {
  state.error = null
  renderError(errorBox, null)
}

async function refreshRules(): Promise<void> {
  const body = await client.listRules()
  applyRules(state, body.version, body.rules)
  renderRules(rulePanel, state.rules.list, state.rules.version,
    onDeleteRule, onGeneralize, onBootstrap)
}

async function runSearch(query: string): Promise<void> {
  if (!query.trim()) return
  const seq = beginSearch(state, query)
  try {
    const response = await client.search(query)
    if (applySearch(state, seq, response)) {
      renderSearch(searchPanel, response, openSentence, runSearch)
    }
    clearError()
  } catch (err) {
    if (seq === state.search.requestSeq) showError(err)
  }
}

async function openSentence(sentenceId: number): Promise<void> {
  try {
    const view = await client.sentenceView(sentenceId)
    state.inspector.view = view
    state.inspector.selected = []
    renderSentence(inspectorPanel, view, [], onTokenClick)
    clearError()
  } catch (err) {
    showError(err)
  }
}

async function onTokenClick(offset: number): Promise<void> {
  const view = state.inspector.view
  if (!view) return
  const selected = clickToken(state, offset)
  renderSentence(inspectorPanel, view, selected, onTokenClick)
  if (selected.length === 2) {
    try {
      const { candidates } = await client.induceFromClick(
        view.sentence_id, selected[0], selected[1])
      applyCandidates(state, state.candidates.relation ?? 'candidate',
        candidates)
      redrawCandidates()
    } catch (err) {
      showError(err)
    }
  }
}

async function submitRule(text: string): Promise<void> {
  try {
    await client.addRule(text)
    await refreshRules()
    clearError()
  } catch (err) {
    showError(err)  // parse/type/safety errors come back verbatim
  }
}

async function onDeleteRule(ruleId: string): Promise<void> {
  try {
    await client.deleteRule(ruleId)
    await refreshRules()
  } catch (err) {
    showError(err)
  }
}

async function onGeneralize(ruleId: string): Promise<void> {
  try {
    const preview = await client.generalize(ruleId, false)
    const editor = document.getElementById('rule-editor') as HTMLTextAreaElement
    editor.value = preview.generalized
    const confirmed = window.confirm(
      `Generalized form:\n\n${preview.generalized}\n\nAccept it?`)
    if (confirmed) {
      await client.generalize(ruleId, true)
      await refreshRules()
    }
  } catch (err) {
    showError(err)
  }
}

async function onBootstrap(relation: string): Promise<void> {
  state.candidates.relation = relation
  state.candidates.running = true
  state.candidates.rejected.clear()
  redrawCandidates()
  try {
    const job = await client.bootstrap(relation, state.candidates.sort)
    applyCandidates(state, relation, job.candidates ?? [])
    redrawCandidates()
    clearError()
  } catch (err) {
    state.candidates.running = false
    showError(err)
  }
}

function redrawCandidates(): void {
  renderCandidates(candidatePanel, visibleCandidates(state),
    state.candidates.sort, state.candidates.running,
    onAcceptCandidate, onRejectCandidate, onToggleSort)
}

async function onAcceptCandidate(ruleId: string): Promise<void> {
  const relation = state.candidates.relation
  if (!relation) return
  try {
    await client.acceptCandidate(relation, ruleId)
    removeCandidate(state, ruleId)
    redrawCandidates()
    await refreshRules()
  } catch (err) {
    showError(err)
  }
}

async function onRejectCandidate(ruleId: string): Promise<void> {
  const relation = state.candidates.relation
  if (!relation) return
  try {
    await client.rejectCandidate(relation, ruleId)
  } catch {
    // hiding the candidate is a session-local decision; ignore
  }
  rejectCandidate(state, ruleId)
  redrawCandidates()
}

function onToggleSort(): void {
  toggleSort(state)
  redrawCandidates()
}

export function start(): void {
  const searchForm = document.getElementById('search-form') as HTMLFormElement
  searchForm.addEventListener('submit', event => {
    event.preventDefault()
    const input = document.getElementById('search-input') as HTMLInputElement
    void runSearch(input.value)
  })
  const ruleForm = document.getElementById('rule-form') as HTMLFormElement
  ruleForm.addEventListener('submit', event => {
    event.preventDefault()
    const editor = document.getElementById('rule-editor') as HTMLTextAreaElement
    void submitRule(editor.value)
  })
  void refreshRules().catch(showError)
  void client.status().then(info => {
    const count = document.getElementById('corpus-info')
    if (count) {
      count.textContent =
        `${info.sentences} sentences / ${info.tokens} tokens`
    }
  }).catch(showError)
}

if (typeof document !== 'undefined' && document.getElementById('search-form')) {
  start()
}
