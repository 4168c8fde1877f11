import type { FetchLike } from '../src/api.js';
import type { AppCategory, FrameRecord, TimelineResponse } from '../src/types.js';

export function frame(overrides: Partial<FrameRecord> & { id: string }): FrameRecord {
  return {
    ts: '2026-03-14T10:00:00+00:00',
    blob: '0'.repeat(64),
    w: 640,
    h: 480,
    app_id: 'test.app',
    app_name: 'Test App',
    category: 'no_metadata' as AppCategory,
    label: 'Application',
    locator: {},
    trigger: 'interval',
    ...overrides,
  };
}

/** One frame per category, in category order, as the service would send them. */
export function fourCategoryTimeline(date = '2026-03-14'): TimelineResponse {
  const frames: FrameRecord[] = [
    frame({
      id: `${date}/0`,
      app_id: 'browser-x',
      app_name: 'Browser X',
      category: 'web_browser',
      label: 'Page URL',
      locator: { url: 'https://example.com/page', page_title: 'Page' },
    }),
    frame({
      id: `${date}/1`,
      app_id: 'editor-y',
      app_name: 'Editor Y',
      category: 'document_editor',
      label: 'File Directory',
      locator: { file_path: '/docs/report.key', file_name: 'report.key' },
    }),
    frame({
      id: `${date}/2`,
      app_id: 'ide-z',
      app_name: 'IDE Z',
      category: 'project_based',
      label: 'Project',
      locator: { project_root: '/repos/thing' },
    }),
    frame({
      id: `${date}/3`,
      app_id: 'chess',
      app_name: 'Chess',
      category: 'no_metadata',
      label: 'Application',
      locator: {},
    }),
  ];
  return { schema_version: 1, date, length: frames.length, frames };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export interface RecordedCall {
  url: string;
  init?: RequestInit;
}

/** fetch mock: route by prefix, record every call. */
export function mockFetch(
  routes: Record<string, (url: string, init?: RequestInit) => Response | Promise<Response>>,
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    for (const [prefix, handler] of Object.entries(routes)) {
      if (url.startsWith(prefix)) return handler(url, init);
    }
    return jsonResponse({ error: 'not_found', message: `no route for ${url}` }, 404);
  };
  return { fetchFn, calls };
}
