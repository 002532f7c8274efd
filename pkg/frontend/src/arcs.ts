// Layout for dependency arc diagrams: tokens on a baseline, labeled arcs
// above it.  Pure geometry so it can be unit tested without a DOM.

import type { DepView, TokenView } from './types'

export const CHAR_WIDTH = 8.5
export const TOKEN_GAP = 18
export const BASELINE_Y = 170
export const ARC_UNIT = 26

export interface TokenBox {
  offset: number
  surface: string
  tag: string
  x: number       // center of the token
  width: number
}

export interface Arc {
  label: string
  head: number
  dependent: number
  x1: number      // head anchor
  x2: number      // dependent anchor
  height: number
  path: string
  labelX: number
  labelY: number
}

export function layoutTokens(tokens: TokenView[]): TokenBox[] {
  const boxes: TokenBox[] = []
  let cursor = TOKEN_GAP
  for (const tok of tokens) {
    const width = Math.max(2, tok.surface.length) * CHAR_WIDTH
    boxes.push({
      offset: tok.offset,
      surface: tok.surface,
      tag: tok.tag,
      x: cursor + width / 2,
      width,
    })
    cursor += width + TOKEN_GAP
  }
  return boxes
}

export function diagramWidth(boxes: TokenBox[]): number {
  if (boxes.length === 0) return TOKEN_GAP * 2
  const last = boxes[boxes.length - 1]
  return last.x + last.width / 2 + TOKEN_GAP
}

/** Arc height grows with the number of arcs nested underneath, so crossing
 *  arcs stay readable. */
export function layoutArcs(boxes: TokenBox[], deps: DepView[]): Arc[] {
  const byOffset = new Map(boxes.map(b => [b.offset, b]))
  const sorted = [...deps].sort(
    (a, b) => span(a) - span(b) || a.head - b.head || a.dependent - b.dependent)
  const levels: Arc[] = []
  const out: Arc[] = []
  for (const dep of sorted) {
    const headBox = byOffset.get(dep.head)
    const depBox = byOffset.get(dep.dependent)
    if (!headBox || !depBox) continue
    const lo = Math.min(headBox.x, depBox.x)
    const hi = Math.max(headBox.x, depBox.x)
    let level = 1
    for (const placed of levels) {
      const plo = Math.min(placed.x1, placed.x2)
      const phi = Math.max(placed.x1, placed.x2)
      if (lo < phi && plo < hi) {
        level = Math.max(level, Math.ceil(placed.height / ARC_UNIT) + 1)
      }
    }
    const height = level * ARC_UNIT
    const arc: Arc = {
      label: dep.label,
      head: dep.head,
      dependent: dep.dependent,
      x1: headBox.x,
      x2: depBox.x,
      height,
      path: arcPath(headBox.x, depBox.x, height),
      labelX: (headBox.x + depBox.x) / 2,
      labelY: BASELINE_Y - height - 4,
    }
    levels.push(arc)
    out.push(arc)
  }
  return out
}

function span(dep: DepView): number {
  return Math.abs(dep.head - dep.dependent)
}

export function arcPath(x1: number, x2: number, height: number): string {
  const y = BASELINE_Y - 14
  const top = y - height
  return `M ${x1} ${y} C ${x1} ${top}, ${x2} ${top}, ${x2} ${y}`
}
