// Editor session state: the working copy of a ticket's grid, with a
// bounded undo stack. Purely client state; a refresh re-fetches the
// ticket's stored grid.

import type { Report, TileSymbol } from './types.js';
import { PALETTE } from './types.js';

export const UNDO_DEPTH = 100;

export function gridToRows(grid: string): string[] {
  const rows = grid.split('\n');
  while (rows.length && rows[rows.length - 1] === '') rows.pop();
  return rows;
}

export function rowsToGrid(rows: string[]): string {
  // every row newline-terminated, matching the level text format
  return rows.map((row) => row + '\n').join('');
}

export class EditorSession {
  readonly ticketId: string;
  readonly width: number;
  readonly height: number;
  private rows: string[];
  private undoStack: string[][] = [];
  lastReport: Report | null;
  dirty = false;

  constructor(ticketId: string, grid: string, report: Report | null = null) {
    this.ticketId = ticketId;
    this.rows = gridToRows(grid);
    this.height = this.rows.length;
    this.width = this.rows[0]?.length ?? 0;
    this.lastReport = report;
  }

  get grid(): string {
    return rowsToGrid(this.rows);
  }

  cell(r: number, c: number): string {
    return this.rows[r][c];
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  paint(r: number, c: number, symbol: TileSymbol): boolean {
    // resizing is out of scope: the grid's dimensions are fixed
    if (r < 0 || r >= this.height || c < 0 || c >= this.width) return false;
    if (!PALETTE.includes(symbol)) return false;
    if (this.rows[r][c] === symbol) return false;
    this.undoStack.push([...this.rows]);
    if (this.undoStack.length > UNDO_DEPTH) this.undoStack.shift();
    this.rows = [
      ...this.rows.slice(0, r),
      this.rows[r].slice(0, c) + symbol + this.rows[r].slice(c + 1),
      ...this.rows.slice(r + 1),
    ];
    this.dirty = true;
    return true;
  }

  undo(): boolean {
    const previous = this.undoStack.pop();
    if (!previous) return false;
    this.rows = previous;
    this.dirty = true;
    return true;
  }

  get commitEnabled(): boolean {
    // only the server-reported verdict can enable the commit button
    return this.lastReport?.verdict === 'pass';
  }
}

/** Cells where two equal-size grids differ; for the novelty diff view. */
export function diffCells(a: string, b: string): [number, number][] {
  const rowsA = gridToRows(a);
  const rowsB = gridToRows(b);
  if (rowsA.length !== rowsB.length) return [];
  const out: [number, number][] = [];
  for (let r = 0; r < rowsA.length; r++) {
    if (rowsA[r].length !== rowsB[r].length) return [];
    for (let c = 0; c < rowsA[r].length; c++) {
      if (rowsA[r][c] !== rowsB[r][c]) out.push([r, c]);
    }
  }
  return out;
}
