import type { AttributeDoc, ConfigDoc, ModelFeature, ProblemDoc } from './types'

/** One row of the side-by-side comparison table. */
export interface ComparisonRow {
  attribute: string
  left: string
  right: string
  differs: boolean
}

/** Parse a rational payload value ("p/q", decimal string, or number). */
export function rationalToNumber(v: boolean | number | string): number {
  if (typeof v === 'boolean') return v ? 1 : 0
  if (typeof v === 'number') return v
  const slash = v.indexOf('/')
  if (slash >= 0) {
    return Number(v.slice(0, slash)) / Number(v.slice(slash + 1))
  }
  return Number(v)
}

export function formatValue(kind: AttributeDoc['kind'], v: boolean | number | string): string {
  if (kind === 'boolean') return v === true ? 'yes' : 'no'
  if (kind === 'ordinal') return String(v)
  const x = rationalToNumber(v)
  return Number.isInteger(x) ? String(x) : x.toFixed(3)
}

function rawEqual(a: boolean | number | string, b: boolean | number | string): boolean {
  if (typeof a === 'boolean' || typeof b === 'boolean') return a === b
  return rationalToNumber(a) === rationalToNumber(b)
}

/** Rows for two configurations; `differs` marks rows whose values diverge.
 * Every cell comes verbatim (formatted) from the API payloads. */
export function comparisonRows(problem: ProblemDoc, first: ConfigDoc, second: ConfigDoc): ComparisonRow[] {
  return problem.attributes.map((attr, i) => {
    const key = String(i)
    const a = first.values[key]
    const b = second.values[key]
    return {
      attribute: attr.name,
      left: formatValue(attr.kind, a),
      right: formatValue(attr.kind, b),
      differs: !rawEqual(a, b),
    }
  })
}

/** Single-configuration rows (recommendation / final screens). */
export function configurationRows(problem: ProblemDoc, config: ConfigDoc): Array<{ attribute: string; value: string }> {
  return problem.attributes.map((attr, i) => ({
    attribute: attr.name,
    value: formatValue(attr.kind, config.values[String(i)]),
  }))
}

export interface ModelRow {
  label: string
  weight: number
}

function atomLabel(atom: unknown, problem: ProblemDoc): string {
  if (!Array.isArray(atom) || atom.length === 0) return JSON.stringify(atom)
  const tag = atom[0]
  if (tag === 'lit') {
    const name = problem.attributes[atom[1] as number]?.name ?? `#${atom[1]}`
    return atom[2] === false ? `not ${name}` : name
  }
  const rel: Record<string, string> = {
    lt: '<', leq: '≤', eq: '=', neq: '≠', geq: '≥', gt: '>',
  }
  const lin = (atom[1] as { lin: { coeffs: Record<string, string>; const: string } }).lin
  const parts = Object.entries(lin.coeffs).map(([id, coef]) => {
    const name = problem.attributes[Number(id)]?.name ?? `#${id}`
    const c = rationalToNumber(coef)
    return c === 1 ? name : `${c}·${name}`
  })
  const rhs = rationalToNumber(atom[2] as string)
  return `${parts.join(' + ')} ${rel[tag as string] ?? tag} ${Number.isInteger(rhs) ? rhs : rhs.toFixed(2)}`
}

/** Model inspector rows; the API already orders by |weight| descending and
 * the view must preserve that order. */
export function modelRows(features: ModelFeature[], problem: ProblemDoc): ModelRow[] {
  return features.map((f) => ({
    label: f.atoms.map((a) => atomLabel(a, problem)).join(' ∧ '),
    weight: f.weight,
  }))
}

export function isSortedByAbsWeight(rows: ModelRow[]): boolean {
  for (let i = 1; i < rows.length; i++) {
    if (Math.abs(rows[i].weight) > Math.abs(rows[i - 1].weight) + 1e-12) return false
  }
  return true
}

/** Reorder helper for the ranking screen (used by both drag-drop and the
 * keyboard move buttons). */
export function moveItem<T>(items: T[], from: number, to: number): T[] {
  if (from === to || from < 0 || to < 0 || from >= items.length || to >= items.length) {
    return items.slice()
  }
  const out = items.slice()
  const [x] = out.splice(from, 1)
  out.splice(to, 0, x)
  return out
}
