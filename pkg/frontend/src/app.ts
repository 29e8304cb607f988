import { ApiClient, ApiError } from "./api";
import type { HistoryRecord, Page } from "./types";
import { renderErrorBanner, renderHistory, renderHome, renderResult } from "./views";

const PAGE_SIZE = 20;

export interface ViewState {
  page: Page;
  pending: boolean; // at most one in-flight predict
  lastRecord: HistoryRecord | null;
  history: HistoryRecord[];
  historyOffset: number;
  error: string | null;
}

/**
 * Single-page controller over the three screens. The result page can only be
 * reached through a successful predict call; errors surface as a banner on
 * the current page without navigation.
 */
export class App {
  readonly state: ViewState = {
    page: "home",
    pending: false,
    lastRecord: null,
    history: [],
    historyOffset: 0,
    error: null,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  start(): void {
    this.render();
  }

  async submit(file: File, description: string): Promise<void> {
    if (this.state.pending) return;
    this.state.pending = true;
    this.state.error = null;
    this.render();
    try {
      const record = await this.api.predict(file, file.name, description);
      this.state.lastRecord = record;
      this.state.page = "result";
    } catch (e) {
      this.state.error = this.describe(e);
    } finally {
      this.state.pending = false;
      this.render();
    }
  }

  async saveDescription(text: string): Promise<void> {
    const record = this.state.lastRecord;
    if (!record) return;
    this.state.error = null;
    try {
      this.state.lastRecord = await this.api.setDescription(record.id, text);
    } catch (e) {
      this.state.error = `Saving the note failed (${this.describe(e)}). Try again.`;
    }
    this.render();
  }

  async showHistory(offset = 0): Promise<void> {
    this.state.error = null;
    try {
      this.state.history = await this.api.records(PAGE_SIZE, offset);
      this.state.historyOffset = offset;
      this.state.page = "history";
    } catch (e) {
      this.state.error = this.describe(e);
    }
    this.render();
  }

  goHome(): void {
    this.state.page = "home";
    this.state.error = null;
    this.render();
  }

  render(): void {
    this.root.replaceChildren();
    if (this.state.error) {
      this.root.append(renderErrorBanner(this.state.error));
    }
    switch (this.state.page) {
      case "home":
        this.root.append(
          renderHome(
            {
              onSubmit: (file, description) => void this.submit(file, description),
              onShowHistory: () => void this.showHistory(0),
            },
            this.state.pending,
          ),
        );
        break;
      case "result":
        if (!this.state.lastRecord) {
          this.goHome();
          return;
        }
        this.root.append(
          renderResult(this.state.lastRecord, {
            onSaveDescription: (text) => void this.saveDescription(text),
            onBack: () => this.goHome(),
            onShowHistory: () => void this.showHistory(0),
          }),
        );
        break;
      case "history":
        this.root.append(
          renderHistory(
            this.state.history,
            {
              onBack: () => this.goHome(),
              onPage: (offset) => void this.showHistory(offset),
            },
            this.state.historyOffset,
            PAGE_SIZE,
          ),
        );
        break;
    }
  }

  private describe(e: unknown): string {
    if (e instanceof ApiError) return `service error: ${e.code}`;
    return "service unreachable";
  }
}
