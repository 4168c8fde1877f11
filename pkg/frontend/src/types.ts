/** Wire types, mirroring the service's journal vocabulary verbatim. */

export type AppCategory =
  | 'web_browser'
  | 'document_editor'
  | 'project_based'
  | 'no_metadata';

export type Speed = 1 | 2 | 5 | 10 | 20;
export const SPEEDS: Speed[] = [1, 2, 5, 10, 20];
export const DEFAULT_SPEED: Speed = 10;

export interface FrameRecord {
  id: string; // "<date>/<index>"
  ts: string;
  blob: string;
  w: number;
  h: number;
  app_id: string;
  app_name: string;
  category: AppCategory;
  label: string;
  locator: Record<string, string>;
  trigger: 'interval' | 'app_switch';
}

export interface TimelineResponse {
  schema_version: number;
  date: string;
  length: number;
  frames: FrameRecord[];
}

export interface RetrievalAction {
  kind: string;
  target: string;
  app_hint: string;
}

export type OpenVariant = 'default' | 'folder';

export type OpenResult =
  | { ok: true; action: RetrievalAction }
  | { ok: false; error: string; message: string; target?: string };

/** The locator field worth showing beside the label. */
export function locatorText(frame: FrameRecord): string {
  switch (frame.category) {
    case 'web_browser':
      return frame.locator.url ?? '';
    case 'document_editor':
      return frame.locator.file_path ?? '';
    case 'project_based':
      return frame.locator.project_root ?? '';
    default:
      return '';
  }
}
