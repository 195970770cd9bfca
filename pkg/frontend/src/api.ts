// Thin typed client over the repair endpoints. fetch is injectable so
// tests can script the server side.

import type {
  DatasetStats,
  SubmitResponse,
  TicketDetail,
  TicketSummary,
  ValidateResponse,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export interface RepairApi {
  listTickets(): Promise<TicketSummary[]>;
  getTicket(id: string): Promise<TicketDetail>;
  validateGrid(id: string, grid: string): Promise<ValidateResponse>;
  submitRepair(id: string, grid: string): Promise<SubmitResponse>;
  getStats(): Promise<DatasetStats>;
  getLevel(id: string): Promise<{ id: string; grid: string }>;
}

export class HttpRepairApi implements RepairApi {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok && response.status !== 422) {
      const detail = (body as { detail?: string }).detail ?? response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  async listTickets(): Promise<TicketSummary[]> {
    const payload = await this.request<{ tickets: TicketSummary[] }>('/tickets');
    return payload.tickets;
  }

  getTicket(id: string): Promise<TicketDetail> {
    return this.request(`/tickets/${id}`);
  }

  validateGrid(id: string, grid: string): Promise<ValidateResponse> {
    // the grid string travels untouched: no trimming, no re-encoding
    return this.request(`/tickets/${id}/grid`, {
      method: 'PUT',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ grid }),
    });
  }

  submitRepair(id: string, grid: string): Promise<SubmitResponse> {
    return this.request(`/tickets/${id}/submit`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ grid }),
    });
  }

  getStats(): Promise<DatasetStats> {
    return this.request('/dataset/stats');
  }

  getLevel(id: string): Promise<{ id: string; grid: string }> {
    return this.request(`/levels/${id}`);
  }
}
