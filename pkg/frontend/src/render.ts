// DOM rendering for the four panels.  Pure functions from data to elements;
// event wiring stays in main.ts.

import { Arc, BASELINE_Y, TokenBox, diagramWidth, layoutArcs,
         layoutTokens } from './arcs'
import type { CandidateInfo, RuleInfo, SearchResponse,
              SentenceView } from './types'

const SVG_NS = 'http://www.w3.org/2000/svg'

export function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

export function renderSearch(container: HTMLElement,
                             response: SearchResponse | null,
                             onOpenSentence: (sid: number) => void,
                             onSuggest: (word: string) => void): void {
  container.replaceChildren()
  if (!response) return
  const suggestions = el('div', 'suggestions')
  for (const s of response.similar) {
    const chip = el('button', 'chip',
      `${s.word} (${s.occurrences})`)
    chip.title = `cosine ${s.score.toFixed(3)}`
    chip.addEventListener('click', () => onSuggest(s.word))
    suggestions.appendChild(chip)
  }
  for (const s of response.prefix) {
    const chip = el('button', 'chip chip-prefix',
      `${s.word}* (${s.occurrences})`)
    chip.addEventListener('click', () => onSuggest(s.word))
    suggestions.appendChild(chip)
  }
  container.appendChild(suggestions)
  const list = el('ul', 'hits')
  for (const hit of response.hits) {
    const item = el('li', 'hit')
    const label = el('span', 'hit-id', `s${hit.sentence_id}`)
    item.appendChild(label)
    item.appendChild(el('span', 'hit-text', hit.text))
    item.addEventListener('click', () => onOpenSentence(hit.sentence_id))
    list.appendChild(item)
  }
  container.appendChild(list)
  if (response.hits.length === 0) {
    container.appendChild(el('p', 'empty', 'no sentences match'))
  }
}

export function renderRules(container: HTMLElement, rules: RuleInfo[],
                            version: string,
                            onDelete: (id: string) => void,
                            onGeneralize: (id: string) => void,
                            onBootstrap: (relation: string) => void): void {
  container.replaceChildren()
  container.appendChild(el('div', 'version', `version ${version || '(empty)'}`))
  for (const rule of rules) {
    const row = el('div', 'rule')
    const head = el('div', 'rule-head')
    head.appendChild(el('span', 'count', String(rule.count)))
    head.appendChild(el('span', 'comment', rule.comment))
    row.appendChild(head)
    row.appendChild(el('pre', 'rule-text', rule.text))
    const actions = el('div', 'actions')
    const generalize = el('button', 'action', 'generalize')
    generalize.addEventListener('click', () => onGeneralize(rule.rule_id))
    const bootstrap = el('button', 'action', 'bootstrap')
    bootstrap.addEventListener('click', () => {
      const relation = rule.text.split('(')[0]
      onBootstrap(relation)
    })
    const remove = el('button', 'action danger', 'delete')
    remove.addEventListener('click', () => onDelete(rule.rule_id))
    actions.append(generalize, bootstrap, remove)
    row.appendChild(actions)
    container.appendChild(row)
  }
}

export function renderCandidates(container: HTMLElement,
                                 candidates: CandidateInfo[],
                                 sort: string, running: boolean,
                                 onAccept: (id: string) => void,
                                 onReject: (id: string) => void,
                                 onToggleSort: () => void): void {
  container.replaceChildren()
  const bar = el('div', 'bar')
  const toggle = el('button', 'action', `sort: ${sort}`)
  toggle.addEventListener('click', onToggleSort)
  bar.appendChild(toggle)
  if (running) bar.appendChild(el('span', 'spinner', 'bootstrapping ...'))
  container.appendChild(bar)
  for (const cand of candidates) {
    const row = el('div', 'candidate')
    const head = el('div', 'candidate-head')
    head.appendChild(el('span', 'count', String(cand.extraction_count)))
    const pmi = cand.pmi === null ? '' : `pmi ${cand.pmi.toFixed(3)}`
    head.appendChild(el('span', 'pmi',
      `${pmi} overlap ${cand.overlap_count}`))
    row.appendChild(head)
    row.appendChild(el('pre', 'rule-text', cand.rule_text))
    const actions = el('div', 'actions')
    const accept = el('button', 'action', 'accept')
    accept.addEventListener('click', () => onAccept(cand.rule_id))
    const reject = el('button', 'action danger', 'reject')
    reject.addEventListener('click', () => onReject(cand.rule_id))
    actions.append(accept, reject)
    row.appendChild(actions)
    container.appendChild(row)
  }
  if (candidates.length === 0 && !running) {
    container.appendChild(el('p', 'empty', 'no pending candidates'))
  }
}

export function renderSentence(container: HTMLElement, view: SentenceView,
                               selected: number[],
                               onTokenClick: (offset: number) => void): void {
  container.replaceChildren()
  container.appendChild(el('div', 'version',
    `sentence ${view.sentence_id} (${view.doc_id})`))
  const boxes = layoutTokens(view.tokens)
  const arcs = layoutArcs(boxes, view.deps)
  const svg = document.createElementNS(SVG_NS, 'svg')
  const maxHeight = arcs.reduce((h, a) => Math.max(h, a.height), 0)
  svg.setAttribute('width', String(diagramWidth(boxes)))
  svg.setAttribute('height', String(BASELINE_Y + 40))
  svg.setAttribute('viewBox',
    `0 ${BASELINE_Y - maxHeight - 40} ${diagramWidth(boxes)} ${maxHeight + 90}`)
  for (const arc of arcs) {
    svg.appendChild(arcElement(arc))
  }
  for (const box of boxes) {
    svg.appendChild(tokenElement(box, view, selected, onTokenClick))
  }
  container.appendChild(svg)
  if (view.entities.length) {
    const entities = view.entities
      .map(m => `${m.etype}[${m.start}-${m.end}]`).join('  ')
    container.appendChild(el('div', 'entities', entities))
  }
}

function arcElement(arc: Arc): SVGGElement {
  const group = document.createElementNS(SVG_NS, 'g')
  group.setAttribute('class', 'arc')
  group.setAttribute('data-label', arc.label)
  const path = document.createElementNS(SVG_NS, 'path')
  path.setAttribute('d', arc.path)
  path.setAttribute('fill', 'none')
  const label = document.createElementNS(SVG_NS, 'text')
  label.setAttribute('x', String(arc.labelX))
  label.setAttribute('y', String(arc.labelY))
  label.setAttribute('text-anchor', 'middle')
  label.textContent = arc.label
  group.append(path, label)
  return group
}

function tokenElement(box: TokenBox, view: SentenceView, selected: number[],
                      onTokenClick: (offset: number) => void): SVGGElement {
  const group = document.createElementNS(SVG_NS, 'g')
  const cls = selected.includes(box.offset) ? 'token selected' : 'token'
  group.setAttribute('class', cls)
  group.setAttribute('data-offset', String(box.offset))
  const text = document.createElementNS(SVG_NS, 'text')
  text.setAttribute('x', String(box.x))
  text.setAttribute('y', String(BASELINE_Y))
  text.setAttribute('text-anchor', 'middle')
  text.textContent = box.surface
  const tag = document.createElementNS(SVG_NS, 'text')
  tag.setAttribute('x', String(box.x))
  tag.setAttribute('y', String(BASELINE_Y + 16))
  tag.setAttribute('text-anchor', 'middle')
  tag.setAttribute('class', 'tag')
  tag.textContent = box.tag
  group.append(text, tag)
  group.addEventListener('click', () => onTokenClick(box.offset))
  return group
}

export function renderError(container: HTMLElement,
                            message: string | null): void {
  container.textContent = message ?? ''
  container.style.display = message ? 'block' : 'none'
}
