/** One persisted prediction, exactly as the service serializes it. */
export interface HistoryRecord {
  id: string;
  timestamp: string; // ISO-8601 UTC
  roast_level: string;
  probability_percent: number; // already rounded to one decimal server-side
  description: string;
  image_ref: string;
  probabilities: number[]; // by class index: dark, green, light, medium
}

export interface Health {
  model_loaded: boolean;
  artifact_fingerprint: string | null;
  backbone_id: string | null;
  records: number;
}

/** Class labels by probability-vector index. */
export const CLASS_ORDER = ["dark", "green", "light", "medium"] as const;

export type Page = "home" | "result" | "history";
