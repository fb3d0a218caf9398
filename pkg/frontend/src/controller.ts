import { ApiClient, ApiError } from './api'
import type { ConfigDoc, ModelFeature, Phase, ProblemDoc, QueryDoc } from './types'

export interface SessionSnapshot {
  phase: Phase
  sessionId: string | null
  triple: ConfigDoc[]
  query: QueryDoc | null
  recommendation: ConfigDoc | null
  final: ConfigDoc | null
  model: ModelFeature[]
  answered: number
  busy: boolean
  notice: string
}

/** Drives one elicitation session: owns the phase machine, serializes server
 * calls (clicks while a request is in flight are dropped), and keeps only
 * server-provided configurations. */
export class SessionController {
  phase: Phase = 'configuring'
  sessionId: string | null = null
  problem: ProblemDoc | null = null
  triple: ConfigDoc[] = []
  query: QueryDoc | null = null
  recommendation: ConfigDoc | null = null
  final: ConfigDoc | null = null
  model: ModelFeature[] = []
  answered = 0
  busy = false
  notice = ''

  constructor(
    private api: ApiClient,
    private onChange: (s: SessionSnapshot) => void = () => {},
  ) {}

  snapshot(): SessionSnapshot {
    return {
      phase: this.phase,
      sessionId: this.sessionId,
      triple: this.triple,
      query: this.query,
      recommendation: this.recommendation,
      final: this.final,
      model: this.model,
      answered: this.answered,
      busy: this.busy,
      notice: this.notice,
    }
  }

  private emit(): void {
    this.onChange(this.snapshot())
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T | null> {
    if (this.busy) return null
    this.busy = true
    this.notice = ''
    this.emit()
    try {
      return await work()
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.notice = 'The session answered elsewhere; state refreshed.'
        await this.refreshModel()
      } else {
        this.notice = err instanceof Error ? err.message : String(err)
        if (this.phase === 'configuring') this.phase = 'error'
      }
      return null
    } finally {
      this.busy = false
      this.emit()
    }
  }

  async create(problem: ProblemDoc, options: { d?: number; seed?: number } = {}): Promise<void> {
    await this.guarded(async () => {
      const res = await this.api.createSession(problem, options)
      this.problem = problem
      this.sessionId = res.session_id
      this.triple = res.initial_triple
      this.phase = 'ranking'
    })
  }

  reorderTriple(from: number, to: number): void {
    if (this.phase !== 'ranking' || this.busy) return
    const moved = this.triple.slice()
    const [x] = moved.splice(from, 1)
    moved.splice(to, 0, x)
    this.triple = moved
    this.emit()
  }

  async submitRanking(): Promise<void> {
    if (this.phase !== 'ranking') return
    await this.guarded(async () => {
      const res = await this.api.submitRanking(this.sessionId!, this.triple)
      this.query = res.query
      this.recommendation = res.recommendation
      this.answered = res.answered
      this.phase = 'comparing'
      await this.refreshModel()
    })
  }

  async answer(preferred: 'first' | 'second'): Promise<void> {
    if (this.phase !== 'comparing') return
    await this.guarded(async () => {
      const res = await this.api.submitAnswer(this.sessionId!, preferred)
      this.query = res.query
      this.recommendation = res.recommendation
      this.answered = res.answered
      await this.refreshModel()
    })
  }

  async accept(): Promise<void> {
    if (this.phase !== 'comparing') return
    await this.guarded(async () => {
      const res = await this.api.accept(this.sessionId!)
      this.final = res.final
      this.phase = 'accepted'
    })
  }

  private async refreshModel(): Promise<void> {
    if (!this.sessionId) return
    try {
      this.model = await this.api.fetchModel(this.sessionId)
    } catch {
      this.model = []
    }
  }
}
