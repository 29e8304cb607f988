import { CLASS_ORDER, type HistoryRecord } from "./types";

/** One-decimal percent display; the value itself comes from the API untouched. */
export function formatPercent(value: number): string {
  return `${value.toFixed(1)}%`;
}

/** Stored UTC instant rendered in the viewer's local timezone. */
export function formatTimestamp(iso: string): string {
  const date = new Date(iso);
  if (Number.isNaN(date.getTime())) return iso;
  return date.toLocaleString();
}

/** Per-class percent breakdown of the full probability vector. */
export function probabilityBreakdown(record: HistoryRecord): { label: string; percent: number }[] {
  return CLASS_ORDER.map((label, i) => ({
    label,
    percent: (record.probabilities[i] ?? 0) * 100,
  })).sort((a, b) => b.percent - a.percent);
}
