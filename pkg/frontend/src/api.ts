// Typed client over the sargen HTTP API. The UI consumes these endpoints
// exclusively; no compliance fact is computed client-side.

import type {
  CaseState,
  DraftPayload,
  FeedbackAccepted,
  FeedbackRequest,
  TracePayload,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class StaleVersionError extends ApiError {
  constructor(message: string) {
    super(409, 'StaleVersion', message);
  }
}

export interface ApiConfig {
  baseUrl: string;
  token?: string;
}

async function parseError(response: Response): Promise<ApiError> {
  let code = `HTTP_${response.status}`;
  let message = response.statusText;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body: keep the status text
  }
  if (response.status === 409) {
    return new StaleVersionError(message);
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly config: ApiConfig) {}

  private headers(json = true): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers['content-type'] = 'application/json';
    if (this.config.token) headers['authorization'] = `Bearer ${this.config.token}`;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.config.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createCase(caseDocument: string): Promise<{ case_id: string }> {
    return this.request('/cases', {
      method: 'POST',
      headers: this.headers(),
      body: caseDocument,
    });
  }

  runCase(caseId: string): Promise<{ case_id: string; stage: string }> {
    return this.request(`/cases/${caseId}/run`, { method: 'POST', headers: this.headers(false) });
  }

  getState(caseId: string): Promise<CaseState> {
    return this.request(`/cases/${caseId}/state`, { headers: this.headers(false) });
  }

  getDraft(caseId: string, version?: number): Promise<DraftPayload> {
    const query = version === undefined ? '' : `?version=${version}`;
    return this.request(`/cases/${caseId}/draft${query}`, { headers: this.headers(false) });
  }

  getTrace(caseId: string, version?: number): Promise<TracePayload> {
    const query = version === undefined ? '' : `?version=${version}`;
    return this.request(`/cases/${caseId}/trace${query}`, { headers: this.headers(false) });
  }

  submitFeedback(caseId: string, feedback: FeedbackRequest): Promise<FeedbackAccepted> {
    return this.request(`/cases/${caseId}/feedback`, {
      method: 'POST',
      headers: this.headers(),
      body: JSON.stringify(feedback),
    });
  }
}
