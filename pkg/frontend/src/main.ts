import { ApiClient } from "./api";
import { App } from "./app";

declare global {
  interface Window {
    BEANROAST_API_BASE?: string;
  }
}

/** Service base URL: localStorage override, then a window global, then same origin. */
function apiBase(): string {
  try {
    const stored = window.localStorage.getItem("beanroast_api_base");
    if (stored) return stored;
  } catch {
    // storage may be unavailable; fall through
  }
  return window.BEANROAST_API_BASE ?? "";
}

const root = document.getElementById("app");
if (root) {
  new App(new ApiClient(apiBase()), root).start();
}
