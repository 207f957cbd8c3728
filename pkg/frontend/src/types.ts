// Payload shapes of the review API, mirrored from the service.

export type Point = [number, number];

export interface StateCounts {
  snowy: number;
  clear: number;
  outcomes: number;
  pending: number;
  auto_matched: number;
  matched: number;
  unmatched: number;
}

export interface StateSummary {
  schema_version: number;
  config: { thetas: number[]; [key: string]: unknown };
  counts: StateCounts;
  clear_ids: string[];
}

export interface PendingEntry {
  snowy_id: string;
  tier: number | null;
  status: string;
  candidate_count: number;
}

export interface PendingList {
  pending: PendingEntry[];
}

export interface SnowyTrack {
  polyline: Point[];
  frame_count: number | null;
  road_users: number | null;
}

export interface CandidatePayload {
  clear_id: string;
  coverages: number[];
  d_max: number | null;
  frame_count: number | null;
  road_users: number | null;
  polyline: Point[];
}

export interface DecisionPayload {
  clear_id: string;
  decided_by: string;
  note: string;
  decided_at: string | null;
}

export interface PairPayload {
  snowy_id: string;
  tier: number | null;
  status: string;
  thetas: number[];
  snowy: SnowyTrack;
  candidates: CandidatePayload[];
  decision: DecisionPayload | null;
  available_clear_ids: string[];
}

export interface DecisionResponse {
  result: "accepted" | "invalid" | "conflict" | "unknown";
  pending?: number;
  reason?: string;
  decision?: DecisionPayload;
}
