// The repair workbench: ticket queue on the left, tile editor on the right.
// All verdicts come from the server; this file only renders them.

import type { RepairApi } from './api.js';
import { EditorSession, diffCells, gridToRows } from './session.js';
import type {
  ConstraintId,
  Novelty,
  Report,
  TicketSummary,
  TileSymbol,
} from './types.js';
import { PALETTE } from './types.js';

export const VALIDATE_DEBOUNCE_MS = 300;

const TILE_NAMES: Record<string, string> = {
  A: 'walk A',
  B: 'walk B',
  C: 'walk C',
  E: 'wall E',
  '#': 'wall #',
  F: 'water',
  J: 'door',
};

type CellMeta = {
  constraints: ConstraintId[];
  door: boolean;
  wide: boolean;
};

export class App {
  private session: EditorSession | null = null;
  private selected: TileSymbol = 'A';
  private validateTimer: ReturnType<typeof setTimeout> | null = null;
  private novelty: Novelty | null = null;

  constructor(
    private root: HTMLElement,
    private api: RepairApi,
    private debounceMs: number = VALIDATE_DEBOUNCE_MS,
  ) {
    this.root.innerHTML = `
      <div id="banner" class="banner hidden"></div>
      <div class="layout">
        <aside id="queue-panel">
          <h2>Repair queue</h2>
          <div id="stats"></div>
          <ul id="queue"></ul>
        </aside>
        <main id="editor-panel">
          <div id="editor-empty">Select a ticket to start repairing.</div>
          <div id="editor" class="hidden"></div>
        </main>
      </div>`;
  }

  // ---- queue -------------------------------------------------------------

  async refreshQueue(): Promise<void> {
    const queue = this.root.querySelector('#queue') as HTMLElement;
    let tickets: TicketSummary[];
    try {
      tickets = await this.api.listTickets();
      await this.renderStats();
      this.showBanner(null);
    } catch (err) {
      this.showBanner('API unreachable — is `roomforge serve` running?');
      return;
    }
    const pending = tickets.filter((t) => t.status === 'pending');
    if (this.session && !pending.some((t) => t.ticket_id === this.session!.ticketId)) {
      this.closeEditor(); // ticket was closed elsewhere; drop the stale session
    }
    queue.innerHTML = '';
    if (pending.length === 0) {
      queue.innerHTML = '<li class="empty">Queue is empty — nothing to repair.</li>';
      return;
    }
    for (const ticket of pending) {
      const item = document.createElement('li');
      item.className = 'ticket-row';
      item.dataset.ticketId = ticket.ticket_id;
      const badges = ticket.failed_constraints
        .map((cid) => `<span class="badge badge-${cid}">${cid}</span>`)
        .join('');
      item.innerHTML =
        `<span class="tid">${ticket.ticket_id}</span>` +
        `<span class="dims">${ticket.width}×${ticket.height}</span>` +
        `<span class="score" title="offending cells">${ticket.repairability}</span>` +
        `<span class="badges">${badges}</span>`;
      item.addEventListener('click', () => void this.openTicket(ticket.ticket_id));
      queue.appendChild(item);
    }
  }

  private async renderStats(): Promise<void> {
    const stats = await this.api.getStats();
    const el = this.root.querySelector('#stats') as HTMLElement;
    el.innerHTML =
      `<span id="stat-entries">${stats.entries}</span> levels in dataset, ` +
      `<span id="stat-pending">${stats.pending_tickets}</span> tickets pending`;
  }

  private showBanner(message: string | null): void {
    const banner = this.root.querySelector('#banner') as HTMLElement;
    banner.textContent = message ?? '';
    banner.classList.toggle('hidden', message === null);
  }

  // ---- editor ------------------------------------------------------------

  async openTicket(ticketId: string): Promise<void> {
    const detail = await this.api.getTicket(ticketId);
    this.session = new EditorSession(detail.ticket_id, detail.grid, detail.report);
    this.novelty = null;
    this.renderEditor();
  }

  closeEditor(): void {
    this.session = null;
    this.novelty = null;
    const editor = this.root.querySelector('#editor') as HTMLElement;
    editor.classList.add('hidden');
    editor.innerHTML = '';
    (this.root.querySelector('#editor-empty') as HTMLElement).classList.remove('hidden');
  }

  get currentSession(): EditorSession | null {
    return this.session;
  }

  private cellMeta(report: Report | null): Map<string, CellMeta> {
    const meta = new Map<string, CellMeta>();
    const at = (r: number, c: number): CellMeta => {
      const key = `${r},${c}`;
      let entry = meta.get(key);
      if (!entry) {
        entry = { constraints: [], door: false, wide: false };
        meta.set(key, entry);
      }
      return entry;
    };
    if (!report) return meta;
    for (const check of report.constraints) {
      if (check.pass) continue;
      for (const [r, c] of check.cells) at(r, c).constraints.push(check.id);
    }
    for (const door of report.doors) {
      for (const [r, c] of [...door.junctions, ...door.gap_cells]) at(r, c).door = true;
    }
    for (const [r, c] of report.wide_region) at(r, c).wide = true;
    return meta;
  }

  private renderEditor(): void {
    const session = this.session;
    if (!session) return;
    (this.root.querySelector('#editor-empty') as HTMLElement).classList.add('hidden');
    const editor = this.root.querySelector('#editor') as HTMLElement;
    editor.classList.remove('hidden');
    editor.innerHTML = `
      <div class="toolbar">
        <span class="tid">${session.ticketId}</span>
        <div id="palette"></div>
        <button id="undo-btn">Undo</button>
        <button id="commit-btn">Commit repair</button>
      </div>
      <div id="verdict"></div>
      <div id="grid" role="grid"></div>
      <ul id="constraint-list"></ul>
      <div id="diff-panel" class="hidden"></div>`;

    const palette = editor.querySelector('#palette') as HTMLElement;
    for (const symbol of PALETTE) {
      const swatch = document.createElement('button');
      swatch.className = `swatch tile-${cssTile(symbol)}`;
      swatch.dataset.symbol = symbol;
      swatch.title = TILE_NAMES[symbol];
      swatch.textContent = symbol;
      if (symbol === this.selected) swatch.classList.add('selected');
      swatch.addEventListener('click', () => {
        this.selected = symbol;
        editor.querySelectorAll('.swatch').forEach((el) =>
          el.classList.toggle('selected', (el as HTMLElement).dataset.symbol === symbol),
        );
      });
      palette.appendChild(swatch);
    }

    (editor.querySelector('#undo-btn') as HTMLButtonElement).addEventListener(
      'click',
      () => {
        if (session.undo()) {
          this.renderGrid();
          this.scheduleValidate();
        }
      },
    );
    (editor.querySelector('#commit-btn') as HTMLButtonElement).addEventListener(
      'click',
      () => void this.commit(),
    );

    this.renderGrid();
  }

  /** Redraw grid cells and verdict from session state. Cheap enough to call
   * after every paint; overlays always reflect the latest server report. */
  renderGrid(): void {
    const session = this.session;
    if (!session) return;
    const gridEl = this.root.querySelector('#grid') as HTMLElement;
    const meta = this.cellMeta(session.lastReport);
    gridEl.style.setProperty('--cols', String(session.width));
    gridEl.innerHTML = '';
    for (let r = 0; r < session.height; r++) {
      for (let c = 0; c < session.width; c++) {
        const symbol = session.cell(r, c);
        const cell = document.createElement('div');
        cell.className = `cell tile-${cssTile(symbol)}`;
        cell.dataset.r = String(r);
        cell.dataset.c = String(c);
        cell.textContent = symbol;
        const info = meta.get(`${r},${c}`);
        if (info) {
          if (info.constraints.length > 0) {
            cell.classList.add('offending', `offend-${info.constraints[0]}`);
            cell.title = info.constraints.join(', ');
          }
          if (info.door) cell.classList.add('door-cell');
          if (info.wide) cell.classList.add('wide-region');
        }
        cell.addEventListener('click', () => {
          if (session.paint(r, c, this.selected)) {
            this.renderGrid();
            this.scheduleValidate();
          }
        });
        gridEl.appendChild(cell);
      }
    }

    const verdict = this.root.querySelector('#verdict') as HTMLElement;
    const report = session.lastReport;
    if (report) {
      if (report.verdict === 'pass') {
        const noveltyNote =
          this.novelty === null
            ? ''
            : this.novelty.is_novel
              ? ' and novel'
              : ` but NOT novel (distance ${this.novelty.min_distance_raw ?? '?'} < ${this.novelty.threshold_cells})`;
        verdict.textContent = `Server verdict: PASS${noveltyNote}`;
      } else {
        verdict.textContent = `Server verdict: FAIL (repairability ${report.repairability})`;
      }
      verdict.className = report.verdict === 'pass' ? 'pass' : 'fail';
    } else {
      verdict.textContent = 'Validating…';
      verdict.className = '';
    }

    const list = this.root.querySelector('#constraint-list') as HTMLElement;
    list.innerHTML = '';
    for (const check of report?.constraints ?? []) {
      const item = document.createElement('li');
      item.className = check.pass ? 'ok' : `failed offend-${check.id}`;
      item.textContent = `${check.id} ${check.pass ? '✓' : '✗'} ${check.message}`;
      list.appendChild(item);
    }

    const commitBtn = this.root.querySelector('#commit-btn') as HTMLButtonElement | null;
    if (commitBtn) {
      commitBtn.disabled = !session.commitEnabled;
      commitBtn.title = session.commitEnabled
        ? 'Validate and add this room to the dataset'
        : `Blocked by: ${failedIds(report).join(', ') || 'pending validation'}`;
    }
  }

  // ---- validation (debounced, server-side) --------------------------------

  scheduleValidate(): void {
    if (this.validateTimer !== null) clearTimeout(this.validateTimer);
    this.validateTimer = setTimeout(() => {
      this.validateTimer = null;
      void this.liveValidate();
    }, this.debounceMs);
  }

  async liveValidate(): Promise<void> {
    const session = this.session;
    if (!session) return;
    try {
      const response = await this.api.validateGrid(session.ticketId, session.grid);
      if (this.session !== session) return; // editor moved on meanwhile
      if (response.parse_ok && response.report) {
        session.lastReport = response.report;
        this.novelty = response.novelty ?? null;
      }
      this.renderGrid();
      this.showBanner(null);
    } catch {
      // inline failure only; editing is never blocked by a validation error
      this.showBanner('Validation request failed; retrying on next edit.');
    }
  }

  // ---- commit --------------------------------------------------------------

  async commit(): Promise<void> {
    const session = this.session;
    if (!session || !session.commitEnabled) return;
    let response;
    try {
      response = await this.api.submitRepair(session.ticketId, session.grid);
    } catch (err) {
      const status = (err as { status?: number }).status;
      if (status === 409) {
        this.closeEditor();
        await this.refreshQueue();
        this.showBanner('Ticket was already closed in another session.');
        return;
      }
      this.showBanner('Commit failed — server unreachable.');
      return;
    }
    if (response.accepted) {
      this.closeEditor();
      await this.refreshQueue();
      return;
    }
    if (response.report) session.lastReport = response.report;
    this.renderGrid();
    if (response.novelty && !response.novelty.is_novel && response.nearest_grid) {
      this.renderDiff(response.novelty, response.nearest_grid);
    }
  }

  /** Side-by-side view against the nearest dataset level, differing cells
   * highlighted, shown when a repair is rejected for lack of novelty. */
  private renderDiff(novelty: Novelty, nearestGrid: string): void {
    const session = this.session;
    if (!session) return;
    const panel = this.root.querySelector('#diff-panel') as HTMLElement;
    panel.classList.remove('hidden');
    const differing = diffCells(session.grid, nearestGrid);
    const distance = novelty.min_distance_raw ?? novelty.min_distance_swapped;
    panel.innerHTML =
      `<p>Not novel: distance ${distance} to ${novelty.nearest_entry_id} ` +
      `(needs ≥ ${novelty.threshold_cells}).</p>` +
      `<div class="diff-grids">` +
      renderStaticGrid(session.grid, differing, 'yours') +
      renderStaticGrid(nearestGrid, differing, 'nearest') +
      `</div>`;
  }
}

function failedIds(report: Report | null): ConstraintId[] {
  return (report?.constraints ?? []).filter((c) => !c.pass).map((c) => c.id);
}

function cssTile(symbol: string): string {
  return symbol === '#' ? 'hash' : symbol;
}

function renderStaticGrid(
  grid: string,
  highlight: [number, number][],
  label: string,
): string {
  const marks = new Set(highlight.map(([r, c]) => `${r},${c}`));
  const rows = gridToRows(grid);
  const cells = rows
    .map((row, r) =>
      [...row]
        .map((symbol, c) => {
          const diff = marks.has(`${r},${c}`) ? ' diff' : '';
          return `<div class="cell tile-${cssTile(symbol)}${diff}">${symbol}</div>`;
        })
        .join(''),
    )
    .join('');
  return (
    `<figure class="static-grid" data-label="${label}">` +
    `<div class="grid-body" style="--cols:${rows[0]?.length ?? 0}">${cells}</div>` +
    `<figcaption>${label}</figcaption></figure>`
  );
}
