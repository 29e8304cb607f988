import { beforeEach, describe, expect, it } from "vitest";

import { formatPercent, formatTimestamp, probabilityBreakdown } from "../src/format";
import { renderHistory, renderHome, renderResult } from "../src/views";
import { fixtureRecord } from "./stub";

const noopResult = { onSaveDescription() {}, onBack() {}, onShowHistory() {} };
const noopHistory = { onBack() {}, onPage() {} };

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("result page", () => {
  it("renders the roast level as text and the percent with one decimal", () => {
    const page = renderResult(
      fixtureRecord({ roast_level: "medium", probability_percent: 87.3 }),
      noopResult,
    );
    expect(page.querySelector(".roast-level")?.textContent).toBe("medium");
    expect(page.querySelector(".roast-percent")?.textContent).toBe("87.3%");
  });

  it("keeps one decimal even for round values", () => {
    const page = renderResult(
      fixtureRecord({ roast_level: "dark", probability_percent: 90 }),
      noopResult,
    );
    expect(page.querySelector(".roast-percent")?.textContent).toBe("90.0%");
  });

  it("shows the full probability breakdown summing to ~100%", () => {
    const record = fixtureRecord();
    const page = renderResult(record, noopResult);
    const items = [...page.querySelectorAll(".probability-breakdown li")];
    expect(items).toHaveLength(4);
    const total = probabilityBreakdown(record).reduce((acc, row) => acc + row.percent, 0);
    expect(Math.abs(total - 100)).toBeLessThanOrEqual(0.2);
  });

  it("pre-fills the description editor from the record", () => {
    const page = renderResult(fixtureRecord({ description: "batch 7" }), noopResult);
    const editor = page.querySelector<HTMLTextAreaElement>(".description-editor textarea");
    expect(editor?.value).toBe("batch 7");
  });
});

describe("history page", () => {
  it("renders records in the order the service returned them (newest first)", () => {
    const records = [
      fixtureRecord({ id: "c", timestamp: "2026-08-11T12:00:00+00:00", roast_level: "dark" }),
      fixtureRecord({ id: "b", timestamp: "2026-08-11T11:00:00+00:00", roast_level: "light" }),
      fixtureRecord({ id: "a", timestamp: "2026-08-11T10:00:00+00:00", roast_level: "green" }),
    ];
    const page = renderHistory(records, noopHistory, 0, 20);
    const levels = [...page.querySelectorAll(".row-level")].map((n) => n.textContent);
    expect(levels).toEqual(["dark", "light", "green"]);
  });

  it("shows date, time, level, percent, and description per row", () => {
    const record = fixtureRecord({ description: "morning batch" });
    const page = renderHistory([record], noopHistory, 0, 20);
    const row = page.querySelector(".history-row")!;
    expect(row.querySelector(".row-timestamp")?.textContent).toBe(
      formatTimestamp(record.timestamp),
    );
    expect(row.querySelector(".row-percent")?.textContent).toBe("87.3%");
    expect(row.querySelector(".row-description")?.textContent).toBe("morning batch");
  });

  it("shows an explicit empty state", () => {
    const page = renderHistory([], noopHistory, 0, 20);
    expect(page.querySelector(".empty-state")?.textContent).toMatch(/no saved predictions/i);
  });

  it("disables pager buttons at the boundaries", () => {
    const page = renderHistory([fixtureRecord()], noopHistory, 0, 20);
    expect(page.querySelector(".page-newer")?.hasAttribute("disabled")).toBe(true);
    expect(page.querySelector(".page-older")?.hasAttribute("disabled")).toBe(true);
  });
});

describe("home page", () => {
  it("disables submission while a predict call is pending", () => {
    const page = renderHome({ onSubmit() {}, onShowHistory() {} }, true);
    expect(page.querySelector(".submit")?.hasAttribute("disabled")).toBe(true);
  });

  it("uses a camera-capable image input", () => {
    const page = renderHome({ onSubmit() {}, onShowHistory() {} }, false);
    const input = page.querySelector<HTMLInputElement>("input[type=file]")!;
    expect(input.accept).toBe("image/*");
    expect(input.getAttribute("capture")).toBe("environment");
  });
});

describe("formatting", () => {
  it("formats percent values with exactly one decimal", () => {
    expect(formatPercent(87.3)).toBe("87.3%");
    expect(formatPercent(100)).toBe("100.0%");
    expect(formatPercent(25.04)).toBe("25.0%");
  });

  it("renders stored UTC timestamps in the viewer's local timezone", () => {
    const iso = "2026-08-11T09:30:00.000000+00:00";
    expect(formatTimestamp(iso)).toBe(new Date(iso).toLocaleString());
  });

  it("passes malformed timestamps through unchanged", () => {
    expect(formatTimestamp("garbage")).toBe("garbage");
  });
});
