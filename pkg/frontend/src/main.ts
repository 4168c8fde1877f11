import { Api } from './api.js';
import { bindKeyboard } from './keyboard.js';
import { Player } from './player.js';
import { createPlayerView } from './view.js';

const api = new Api('');
const player = new Player(api);

const root = document.getElementById('player');
if (!root) throw new Error('missing #player element');

createPlayerView(player, root);
bindKeyboard(player);

void (async () => {
  await player.loadDates();
  const dates = player.snapshot().dates;
  if (dates.length > 0) await player.openDate(dates[0]);
})();
