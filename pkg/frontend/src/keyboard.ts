/** Keyboard bindings: left/right step one frame, space toggles playback,
 * enter opens the displayed resource. */

import type { Player } from './player.js';

export function handleKey(player: Player, key: string): boolean {
  switch (key) {
    case 'ArrowLeft':
      player.step('prev');
      return true;
    case 'ArrowRight':
      player.step('next');
      return true;
    case ' ':
      player.togglePlay();
      return true;
    case 'Enter':
      void player.open('default');
      return true;
    default:
      return false;
  }
}

export function bindKeyboard(player: Player, target: EventTarget = window): () => void {
  const onKeydown = (event: Event) => {
    const key = (event as KeyboardEvent).key;
    if (handleKey(player, key)) event.preventDefault();
  };
  target.addEventListener('keydown', onKeydown);
  return () => target.removeEventListener('keydown', onKeydown);
}
