import { formatPercent, formatTimestamp, probabilityBreakdown } from "./format";
import type { HistoryRecord } from "./types";

/** Handlers the home page needs from the controller. */
export interface HomeHandlers {
  onSubmit(file: File, description: string): void;
  onShowHistory(): void;
}

export interface ResultHandlers {
  onSaveDescription(text: string): void;
  onBack(): void;
  onShowHistory(): void;
}

export interface HistoryHandlers {
  onBack(): void;
  onPage(offset: number): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Home: pick or capture a photo, optional note, submit for classification. */
export function renderHome(handlers: HomeHandlers, pending: boolean): HTMLElement {
  const page = el("section", "page page-home");
  page.append(el("h1", "title", "Coffee roast check"));
  page.append(el("p", "hint", "Photograph or upload roasting beans to read their roast degree."));

  const form = el("form", "predict-form");
  const input = el("input") as HTMLInputElement;
  input.type = "file";
  input.accept = "image/*";
  input.setAttribute("capture", "environment"); // device camera on mobile
  input.name = "image";

  const description = el("textarea", "description-input") as HTMLTextAreaElement;
  description.placeholder = "Optional note about this batch";
  description.name = "description";

  const submit = el("button", "submit", pending ? "Classifying..." : "Classify roast");
  submit.setAttribute("type", "submit");
  if (pending) submit.setAttribute("disabled", "");

  const fileError = el("p", "field-error");
  fileError.style.display = "none";

  form.append(input, description, submit, fileError);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const file = input.files?.[0];
    if (!file) {
      fileError.textContent = "Choose an image first.";
      fileError.style.display = "";
      return;
    }
    if (!file.type.startsWith("image/")) {
      fileError.textContent = "That file is not an image.";
      fileError.style.display = "";
      return;
    }
    fileError.style.display = "none";
    handlers.onSubmit(file, description.value);
  });
  page.append(form);

  const historyLink = el("button", "nav-history", "History");
  historyLink.addEventListener("click", () => handlers.onShowHistory());
  page.append(historyLink);
  return page;
}

/** Result: roast level text, one-decimal percent, full breakdown, note editor. */
export function renderResult(record: HistoryRecord, handlers: ResultHandlers): HTMLElement {
  const page = el("section", "page page-result");
  page.append(el("h1", "title", "Roast result"));
  page.append(el("p", "roast-level", record.roast_level));
  page.append(el("p", "roast-percent", formatPercent(record.probability_percent)));

  const breakdown = el("ul", "probability-breakdown");
  for (const row of probabilityBreakdown(record)) {
    breakdown.append(el("li", `prob prob-${row.label}`, `${row.label}: ${formatPercent(row.percent)}`));
  }
  page.append(breakdown);
  page.append(el("p", "timestamp", formatTimestamp(record.timestamp)));

  const editor = el("div", "description-editor");
  const text = el("textarea", "description-input") as HTMLTextAreaElement;
  text.value = record.description;
  const save = el("button", "save-description", "Save note");
  save.addEventListener("click", () => handlers.onSaveDescription(text.value));
  editor.append(text, save);
  page.append(editor);

  const back = el("button", "nav-home", "New photo");
  back.addEventListener("click", () => handlers.onBack());
  const history = el("button", "nav-history", "History");
  history.addEventListener("click", () => handlers.onShowHistory());
  page.append(back, history);
  return page;
}

/** History: saved predictions, newest first, with date and time. */
export function renderHistory(
  records: HistoryRecord[],
  handlers: HistoryHandlers,
  offset: number,
  pageSize: number,
): HTMLElement {
  const page = el("section", "page page-history");
  page.append(el("h1", "title", "Prediction history"));

  if (records.length === 0) {
    page.append(el("p", "empty-state", "No saved predictions yet."));
  } else {
    const list = el("ul", "history-list");
    for (const record of records) {
      const item = el("li", "history-row");
      item.append(el("span", "row-timestamp", formatTimestamp(record.timestamp)));
      item.append(el("span", "row-level", record.roast_level));
      item.append(el("span", "row-percent", formatPercent(record.probability_percent)));
      item.append(el("span", "row-description", record.description));
      list.append(item);
    }
    page.append(list);
  }

  const pager = el("div", "pager");
  const newer = el("button", "page-newer", "Newer");
  if (offset === 0) newer.setAttribute("disabled", "");
  newer.addEventListener("click", () => handlers.onPage(Math.max(0, offset - pageSize)));
  const older = el("button", "page-older", "Older");
  if (records.length < pageSize) older.setAttribute("disabled", "");
  older.addEventListener("click", () => handlers.onPage(offset + pageSize));
  pager.append(newer, older);
  page.append(pager);

  const back = el("button", "nav-home", "Back");
  back.addEventListener("click", () => handlers.onBack());
  page.append(back);
  return page;
}

export function renderErrorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}
