export type AttributeKind = 'boolean' | 'ordinal' | 'real'

export interface AttributeDoc {
  name: string
  kind: AttributeKind
  lo?: string
  hi?: string
}

export interface ProblemDoc {
  attributes: AttributeDoc[]
  hard?: unknown[]
  soft?: unknown[]
  atoms?: unknown[]
}

/** Configuration payload: attribute id (as string) to value. */
export interface ConfigDoc {
  values: Record<string, boolean | number | string>
}

export interface QueryDoc {
  first: ConfigDoc
  second: ConfigDoc
}

export interface StepResponse {
  recommendation: ConfigDoc
  query: QueryDoc
  answered: number
}

export interface CreateResponse {
  session_id: string
  initial_triple: ConfigDoc[]
}

export interface ModelFeature {
  atoms: unknown[]
  weight: number
}

export type Phase =
  | 'configuring'
  | 'ranking'
  | 'comparing'
  | 'accepted'
  | 'error'
