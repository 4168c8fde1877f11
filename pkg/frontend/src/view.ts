/** DOM layer: builds the player chrome once, then re-renders from every
 * state snapshot. The displayed label is always the record's own label
 * field; nothing is re-derived client side. */

import type { Player, PlayerState } from './player.js';
import { SPEEDS, locatorText } from './types.js';

const SLIDER_STEPS = 1000;
const TICK_MS = 100;

export function createPlayerView(player: Player, root: HTMLElement): () => void {
  root.innerHTML = `
    <header class="topbar">
      <select class="date-picker" title="date"></select>
      <span class="banner" hidden></span>
    </header>
    <main class="stage">
      <img class="frame" alt="captured screen" hidden>
      <p class="empty-note" hidden>no history for this date</p>
    </main>
    <section class="controls">
      <input class="slider" type="range" min="0" max="${SLIDER_STEPS}" value="0">
      <div class="buttons">
        <button class="step-prev" title="previous frame">&lt;</button>
        <button class="play-toggle">play</button>
        <button class="step-next" title="next frame">&gt;</button>
        <select class="speed">
          ${SPEEDS.map((s) => `<option value="${s}">${s} fps</option>`).join('')}
        </select>
      </div>
    </section>
    <section class="metadata">
      <span class="app-name"></span>
      <span class="ts"></span>
      <div class="locator-row">
        <span class="locator-label"></span>
        <span class="locator-text"></span>
        <button class="open-folder" hidden title="open enclosing folder">folder</button>
      </div>
      <button class="open">Open</button>
    </section>
  `;

  const el = {
    datePicker: root.querySelector('.date-picker') as HTMLSelectElement,
    banner: root.querySelector('.banner') as HTMLElement,
    frame: root.querySelector('.frame') as HTMLImageElement,
    emptyNote: root.querySelector('.empty-note') as HTMLElement,
    slider: root.querySelector('.slider') as HTMLInputElement,
    stepPrev: root.querySelector('.step-prev') as HTMLButtonElement,
    stepNext: root.querySelector('.step-next') as HTMLButtonElement,
    playToggle: root.querySelector('.play-toggle') as HTMLButtonElement,
    speed: root.querySelector('.speed') as HTMLSelectElement,
    appName: root.querySelector('.app-name') as HTMLElement,
    ts: root.querySelector('.ts') as HTMLElement,
    locatorLabel: root.querySelector('.locator-label') as HTMLElement,
    locatorText: root.querySelector('.locator-text') as HTMLElement,
    openFolder: root.querySelector('.open-folder') as HTMLButtonElement,
    open: root.querySelector('.open') as HTMLButtonElement,
  };

  el.datePicker.addEventListener('change', () => void player.openDate(el.datePicker.value));
  el.slider.addEventListener('input', () =>
    player.scrub(Number(el.slider.value) / SLIDER_STEPS),
  );
  el.stepPrev.addEventListener('click', () => player.step('prev'));
  el.stepNext.addEventListener('click', () => player.step('next'));
  el.playToggle.addEventListener('click', () => player.togglePlay());
  el.speed.addEventListener('change', () => player.setSpeed(Number(el.speed.value)));
  el.open.addEventListener('click', () => void player.open('default'));
  el.openFolder.addEventListener('click', () => void player.open('folder'));

  let timer: ReturnType<typeof setInterval> | null = null;

  const render = (state: PlayerState) => {
    // date picker
    const options = state.dates
      .map((d) => `<option value="${d}"${d === state.date ? ' selected' : ''}>${d}</option>`)
      .join('');
    if (el.datePicker.innerHTML !== options) el.datePicker.innerHTML = options;

    // banner
    el.banner.hidden = state.banner === null;
    el.banner.textContent = state.banner?.text ?? '';
    el.banner.dataset.tone = state.banner?.tone ?? '';

    const frame = player.currentFrame();
    const empty = state.frames.length === 0;
    el.emptyNote.hidden = !empty;
    el.frame.hidden = empty;
    for (const control of [el.slider, el.stepPrev, el.stepNext, el.playToggle, el.speed, el.open]) {
      control.disabled = empty;
    }

    el.slider.value = String(Math.round(player.sliderFraction() * SLIDER_STEPS));
    el.playToggle.textContent = state.playing ? 'pause' : 'play';
    el.speed.value = String(state.speed);

    if (frame) {
      const url = player.imageUrl();
      if (url && el.frame.getAttribute('src') !== url) el.frame.setAttribute('src', url);
      el.appName.textContent = frame.app_name;
      el.ts.textContent = frame.ts;
      el.locatorLabel.textContent = frame.label;
      el.locatorText.textContent = locatorText(frame);
      el.openFolder.hidden = frame.category !== 'document_editor';
    } else {
      el.frame.removeAttribute('src');
      el.appName.textContent = '';
      el.ts.textContent = '';
      el.locatorLabel.textContent = '';
      el.locatorText.textContent = '';
      el.openFolder.hidden = true;
    }

    // drive (and cancel) the playback timer from state, so pausing by any
    // route, scrubbing included, stops it
    if (state.playing && timer === null) {
      timer = setInterval(() => player.tick(TICK_MS / 1000), TICK_MS);
    } else if (!state.playing && timer !== null) {
      clearInterval(timer);
      timer = null;
    }
  };

  const unsubscribe = player.subscribe(render);
  return () => {
    unsubscribe();
    if (timer !== null) clearInterval(timer);
  };
}
