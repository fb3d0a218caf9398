import type { ConfigDoc, CreateResponse, ModelFeature, ProblemDoc, StepResponse } from './types'

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message)
  }
}

type FetchLike = typeof fetch

/** Thin client over the session service; the fetch implementation is
 * injectable so tests can mock the server. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const r = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    })
    if (!r.ok) {
      let detail = r.statusText
      try {
        const body = await r.json()
        if (body && typeof body.detail === 'string') detail = body.detail
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(r.status, detail)
    }
    return r.json() as Promise<T>
  }

  createSession(problem: ProblemDoc, options: { d?: number; seed?: number } = {}): Promise<CreateResponse> {
    return this.call('/sessions', {
      method: 'POST',
      body: JSON.stringify({ problem, options }),
    })
  }

  submitRanking(sessionId: string, order: ConfigDoc[]): Promise<StepResponse> {
    return this.call(`/sessions/${sessionId}/ranking`, {
      method: 'POST',
      body: JSON.stringify({ order }),
    })
  }

  submitAnswer(sessionId: string, preferred: 'first' | 'second'): Promise<StepResponse> {
    return this.call(`/sessions/${sessionId}/answer`, {
      method: 'POST',
      body: JSON.stringify({ preferred }),
    })
  }

  fetchModel(sessionId: string): Promise<ModelFeature[]> {
    return this.call(`/sessions/${sessionId}/model`)
  }

  accept(sessionId: string): Promise<{ final: ConfigDoc }> {
    return this.call(`/sessions/${sessionId}/accept`, { method: 'POST' })
  }
}
