// Payload types for the repair API. The server is the single source of
// truth for every verdict shown in the UI.

export type TileSymbol = 'A' | 'B' | 'C' | 'E' | '#' | 'F' | 'J';

export const PALETTE: TileSymbol[] = ['A', 'B', 'C', 'E', '#', 'F', 'J'];

export type ConstraintId = 'C1' | 'C2' | 'C3' | 'C4' | 'C5' | 'C6' | 'C7';

export interface ConstraintResult {
  id: ConstraintId;
  pass: boolean;
  cells: [number, number][];
  message: string;
}

export interface DoorInfo {
  wall: 'top' | 'bottom' | 'left' | 'right';
  orientation: 'vertical' | 'horizontal';
  junctions: [number, number][];
  gap_cells: [number, number][];
}

export interface Report {
  verdict: 'pass' | 'fail';
  constraints: ConstraintResult[];
  repairability: number;
  doors: DoorInfo[];
  wide_region: [number, number][];
  all_doors_connected: boolean | null;
}

export interface Novelty {
  min_distance_raw: number | null;
  min_distance_swapped: number | null;
  threshold_cells: number;
  is_novel: boolean;
  nearest_entry_id: string | null;
}

export interface TicketSummary {
  ticket_id: string;
  status: 'pending' | 'repaired' | 'discarded';
  round: number;
  repairability: number;
  failed_constraints: ConstraintId[];
  width: number;
  height: number;
}

export interface TicketDetail extends TicketSummary {
  grid: string;
  report: Report;
}

export interface ValidateResponse {
  parse_ok: boolean;
  report?: Report;
  novelty?: Novelty | null;
  error?: string;
}

export interface SubmitResponse {
  accepted: boolean;
  report?: Report;
  novelty?: Novelty | null;
  nearest_grid?: string;
  error?: string;
}

export interface DatasetStats {
  entries: number;
  by_provenance: Record<string, number>;
  pending_tickets: number;
}
