/** Typed client for the history service. All access goes through here;
 * the fetch function is injectable so tests run against a mock. */

import type { OpenResult, OpenVariant, TimelineResponse } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export class Api {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  frameImageUrl(frameId: string): string {
    return `${this.base}/frame/${frameId}/image`;
  }

  async dates(): Promise<string[]> {
    const body = await this.getJson('/dates');
    return body.dates as string[];
  }

  async timeline(date: string): Promise<TimelineResponse> {
    return (await this.getJson(`/timeline/${date}`)) as unknown as TimelineResponse;
  }

  /** POST /open. Launch problems come back as a structured failure, not a
   * throw, so the player can render them as a banner. */
  async open(frameId: string, variant: OpenVariant = 'default'): Promise<OpenResult> {
    const response = await this.fetchFn(`${this.base}/open`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ frame_id: frameId, variant }),
    });
    const body = await response.json();
    if (response.ok) {
      return { ok: true, action: body.action };
    }
    return {
      ok: false,
      error: body.error ?? `http_${response.status}`,
      message: body.message ?? response.statusText,
      target: body.target,
    };
  }

  private async getJson(path: string): Promise<Record<string, unknown>> {
    const response = await this.fetchFn(`${this.base}${path}`);
    if (!response.ok) {
      let code = `http_${response.status}`;
      let message = response.statusText;
      try {
        const body = await response.json();
        code = body.error ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return response.json();
  }
}
