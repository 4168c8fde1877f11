/** Player state machine. No DOM in here: the view subscribes and renders
 * whatever this says, which is what keeps frame and metadata in lockstep
 * (one state object changes atomically per interaction). */

import type { Api } from './api.js';
import {
  DEFAULT_SPEED,
  FrameRecord,
  OpenVariant,
  SPEEDS,
  Speed,
} from './types.js';

export interface Banner {
  tone: 'info' | 'success' | 'error';
  text: string;
}

export interface PlayerState {
  dates: string[];
  date: string | null;
  frames: FrameRecord[];
  index: number;
  playing: boolean;
  speed: Speed;
  banner: Banner | null;
  loading: boolean;
}

type Listener = (state: PlayerState) => void;

function scrubIndex(length: number, fraction: number): number {
  const f = Math.min(1, Math.max(0, fraction));
  // half away from zero, matching the service's timeline math
  return Math.floor(f * (length - 1) + 0.5);
}

export class Player {
  private state: PlayerState = {
    dates: [],
    date: null,
    frames: [],
    index: 0,
    playing: false,
    speed: DEFAULT_SPEED,
    banner: null,
    loading: false,
  };

  private listeners: Listener[] = [];
  private openInFlight = false;

  constructor(private readonly api: Api) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    listener(this.snapshot());
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  snapshot(): PlayerState {
    return { ...this.state, frames: this.state.frames };
  }

  get length(): number {
    return this.state.frames.length;
  }

  currentFrame(): FrameRecord | null {
    return this.state.frames[this.state.index] ?? null;
  }

  /** Slider position in [0, 1] for the current cursor. */
  sliderFraction(): number {
    const n = this.length;
    return n > 1 ? this.state.index / (n - 1) : 0;
  }

  imageUrl(): string | null {
    const frame = this.currentFrame();
    return frame ? this.api.frameImageUrl(frame.id) : null;
  }

  async loadDates(): Promise<void> {
    try {
      const dates = await this.api.dates();
      this.patch({ dates });
    } catch (err) {
      this.patch({ banner: { tone: 'error', text: `could not load dates: ${message(err)}` } });
    }
  }

  /** Select a day. The cursor lands on the most recent frame, paused. */
  async openDate(date: string): Promise<void> {
    this.patch({ loading: true });
    try {
      const timeline = await this.api.timeline(date);
      this.patch({
        date,
        frames: timeline.frames,
        index: Math.max(0, timeline.frames.length - 1),
        playing: false,
        banner: null,
        loading: false,
      });
    } catch (err) {
      // state rolls back to the last good timeline; only the banner changes
      this.patch({
        loading: false,
        banner: { tone: 'error', text: `could not load ${date}: ${message(err)}` },
      });
    }
  }

  /** Drag or click on the timeline. Scrubbing while playing pauses first. */
  scrub(fraction: number): void {
    if (this.length === 0) return;
    this.patch({ playing: false, index: scrubIndex(this.length, fraction) });
  }

  step(direction: 'prev' | 'next'): void {
    if (this.length === 0) return;
    const delta = direction === 'next' ? 1 : -1;
    const index = Math.min(this.length - 1, Math.max(0, this.state.index + delta));
    this.patch({ index });
  }

  togglePlay(): void {
    if (this.length === 0) return;
    if (!this.state.playing && this.state.index >= this.length - 1) {
      // replay from the start instead of stopping immediately at the end
      this.patch({ playing: true, index: 0 });
      return;
    }
    this.patch({ playing: !this.state.playing });
  }

  setSpeed(speed: number): void {
    if (!SPEEDS.includes(speed as Speed)) return;
    this.patch({ speed: speed as Speed });
  }

  /** Advance playback by elapsed seconds; whole frames only, stop at the end. */
  tick(elapsed: number): void {
    if (!this.state.playing || this.length === 0) return;
    const advanced = this.state.index + Math.floor(elapsed * this.state.speed);
    const index = Math.min(this.length - 1, advanced);
    this.patch({ index, playing: index < this.length - 1 });
  }

  /** The Open button (and the folder button for document frames).
   * One request in flight at a time: double clicks collapse to one POST. */
  async open(variant: OpenVariant = 'default'): Promise<void> {
    const frame = this.currentFrame();
    if (!frame || this.openInFlight) return;
    this.openInFlight = true;
    try {
      const result = await this.api.open(frame.id, variant);
      if (result.ok) {
        this.patch({ banner: { tone: 'success', text: `opened via ${result.action.kind}` } });
      } else if (result.error === 'open_target_missing') {
        this.patch({
          banner: {
            tone: 'error',
            text: `file no longer at recorded path: ${result.target ?? ''}`,
          },
        });
      } else {
        this.patch({ banner: { tone: 'error', text: result.message } });
      }
    } catch (err) {
      this.patch({ banner: { tone: 'error', text: `open failed: ${message(err)}` } });
    } finally {
      this.openInFlight = false;
    }
  }

  dismissBanner(): void {
    this.patch({ banner: null });
  }

  private patch(partial: Partial<PlayerState>): void {
    this.state = { ...this.state, ...partial };
    const snapshot = this.snapshot();
    for (const listener of this.listeners) listener(snapshot);
  }
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
