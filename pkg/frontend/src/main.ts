import { HttpRepairApi } from './api.js';
import { App } from './app.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app element');

const app = new App(root, new HttpRepairApi());
void app.refreshQueue();

// keep the queue fresh; tickets closed by other sessions disappear
setInterval(() => void app.refreshQueue(), 15_000);
