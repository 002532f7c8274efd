// Thin typed client for the workbench HTTP API.  All extraction semantics
// live server-side; this module only moves JSON.

import type {
  BootstrapJob, CandidateInfo, GeneralizePreview, RuleInfo,
  RuleListResponse, SearchResponse, SentenceView,
} from './types'

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail)
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class WorkbenchClient {
  constructor(
    private baseUrl: string,
    private ruleset: string = 'default',
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init)
    const body = await response.json().catch(() => ({}))
    if (!response.ok) {
      const detail = typeof body?.detail === 'string'
        ? body.detail
        : `request failed with status ${response.status}`
      throw new ServiceError(response.status, detail)
    }
    return body as T
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    })
  }

  search(keyword: string, limit = 20): Promise<SearchResponse> {
    const q = encodeURIComponent(keyword)
    return this.request(`/v1/search?q=${q}&limit=${limit}`)
  }

  listRules(): Promise<RuleListResponse> {
    return this.request(`/v1/rulesets/${this.ruleset}/rules`)
  }

  addRule(text: string, comment?: string): Promise<RuleInfo> {
    return this.post(`/v1/rulesets/${this.ruleset}/rules`, { text, comment })
  }

  deleteRule(ruleId: string): Promise<{ deleted: string }> {
    return this.request(`/v1/rulesets/${this.ruleset}/rules/${ruleId}`, {
      method: 'DELETE',
    })
  }

  generalize(ruleId: string, accept: boolean): Promise<GeneralizePreview> {
    return this.post(
      `/v1/rulesets/${this.ruleset}/rules/${ruleId}/generalize`, { accept })
  }

  async bootstrap(relation: string, sort: 'pmi' | 'count' = 'pmi'):
      Promise<BootstrapJob> {
    const { job_id } = await this.post<{ job_id: string }>(
      `/v1/bootstrap/${relation}/iterate`, { ruleset: this.ruleset, sort })
    // Jobs may take a while on large corpora; poll until completion.
    for (;;) {
      const job = await this.request<BootstrapJob>(
        `/v1/bootstrap/jobs/${job_id}`)
      if (job.status !== 'running') return job
      await new Promise(resolve => setTimeout(resolve, 150))
    }
  }

  candidates(relation: string, sort: 'pmi' | 'count'):
      Promise<{ candidates: CandidateInfo[] }> {
    return this.request(
      `/v1/bootstrap/${relation}/candidates?ruleset=${this.ruleset}&sort=${sort}`)
  }

  acceptCandidate(relation: string, ruleId: string): Promise<RuleInfo> {
    return this.post(`/v1/bootstrap/${relation}/accept`,
      { ruleset: this.ruleset, rule_id: ruleId })
  }

  rejectCandidate(relation: string, ruleId: string):
      Promise<{ rejected: string }> {
    return this.post(`/v1/bootstrap/${relation}/reject`,
      { ruleset: this.ruleset, rule_id: ruleId })
  }

  induceFromClick(sentenceId: number, arg1: number, arg2: number):
      Promise<{ candidates: CandidateInfo[] }> {
    return this.post('/v1/induce/from-click', {
      sentence_id: sentenceId, arg1_offset: arg1, arg2_offset: arg2,
    })
  }

  sentenceView(sentenceId: number): Promise<SentenceView> {
    return this.request(`/v1/sentences/${sentenceId}/view`)
  }

  extractions(relation: string, sample?: number, seed = 0):
      Promise<{ relation: string; total: number; extractions: string[][] }> {
    const params = sample === undefined ? '' : `?sample=${sample}&seed=${seed}`
    return this.request(`/v1/relations/${relation}/extractions${params}`)
  }

  status(): Promise<{ sentences: number; tokens: number }> {
    return this.request('/v1/status')
  }
}
