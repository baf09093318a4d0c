/** Payload shapes of the review service API (single source of truth). */

export interface SessionMeta {
  n_ticks: number;
  sensor_width: number;
  sensor_height: number;
  led_ids: string[];
  led_table: [string, number, number, string][];
  led_table_hash: string;
  config_hash: string;
  version: number;
  label_count: number;
}

/** [start_pixel, length, positive_count, negative_count] over row-major pixels. */
export type RasterRun = [number, number, number, number];

export interface FramePayload {
  width: number;
  height: number;
  frames: { t_ms: number; runs: RasterRun[] }[];
}

export interface BlinkSignature {
  mean_on_us: number;
  mean_off_us: number;
  period_us: number;
  period_pos_us: number;
  period_neg_us: number;
}

export interface ClusterInfo {
  id: number;
  centroid: [number, number];
  bbox: [number, number, number, number];
  size: number;
  signature: BlinkSignature | null;
  outlier: boolean;
  matched_led: string | null;
  cost: number | null;
}

export type LabelSource = "auto" | "corrected" | "coasted";

export interface LabelRow {
  t_ms: number;
  led_id: string;
  x: number;
  y: number;
  source: LabelSource;
}

export type CorrectionAction = "move" | "reassign" | "delete";

export interface CorrectionRecord {
  t_ms: number;
  led_id: string;
  action: CorrectionAction;
  x?: number;
  y?: number;
  cluster_ref?: number;
  author?: string;
}

export interface PostResult {
  status: "ok" | "conflict";
  version: number;
  labels: LabelRow[];
}
