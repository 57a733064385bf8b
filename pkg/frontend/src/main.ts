import { ApiError, CampaignApi } from "./api.js";
import { renderGeneration } from "./generation.js";
import { renderLineage } from "./lineage.js";
import { renderTrends } from "./trends.js";
import type { CampaignSummary } from "./types.js";
import { canAdvance, statusLabel } from "./viewmodel.js";

export type TabName = "generation" | "trends" | "lineage";

export interface DashboardOptions {
  /** Refetch cadence in ms; 0 disables the timer (tests drive refresh()). */
  pollMs?: number;
}

export interface Dashboard {
  refresh(): Promise<void>;
  setTab(tab: TabName): Promise<void>;
  stop(): void;
}

function toastText(failure: unknown): string {
  if (failure instanceof ApiError) return `[${failure.code}] ${failure.message}`;
  return String(failure);
}

export function createDashboard(
  root: HTMLElement,
  api: CampaignApi,
  options: DashboardOptions = {},
): Dashboard {
  root.textContent = "";

  const header = document.createElement("header");
  const status = document.createElement("p");
  status.setAttribute("data-testid", "status-line");
  status.textContent = "loading…";
  header.appendChild(status);

  const advance = document.createElement("button");
  advance.setAttribute("data-testid", "advance-button");
  advance.textContent = "advance generation";
  advance.disabled = true;
  header.appendChild(advance);

  const tabs = document.createElement("nav");
  const tabButtons = new Map<TabName, HTMLButtonElement>();
  for (const name of ["generation", "trends", "lineage"] as TabName[]) {
    const button = document.createElement("button");
    button.setAttribute("data-testid", `tab-${name}`);
    button.textContent = name;
    tabs.appendChild(button);
    tabButtons.set(name, button);
  }
  header.appendChild(tabs);

  const toast = document.createElement("p");
  toast.setAttribute("data-testid", "toast");
  toast.className = "toast";
  header.appendChild(toast);

  const view = document.createElement("main");
  view.setAttribute("data-testid", "view");

  root.appendChild(header);
  root.appendChild(view);

  let activeTab: TabName = "generation";
  let summary: CampaignSummary | null = null;

  async function renderActive(): Promise<void> {
    tabButtons.forEach((button, name) => {
      button.classList.toggle("active", name === activeTab);
    });
    if (summary === null) return;
    if (activeTab === "generation") {
      renderGeneration(view, summary, {
        api,
        onMutated: () => void refresh(),
      });
      return;
    }
    if (activeTab === "trends") {
      try {
        const [doc, csv] = await Promise.all([api.reportJson(), api.reportCsv()]);
        renderTrends(view, doc, csv);
      } catch (failure) {
        if (failure instanceof ApiError && failure.code === "pending-fitness") {
          view.textContent = "";
          const empty = document.createElement("p");
          empty.setAttribute("data-testid", "trends-empty");
          empty.textContent =
            "no generation has complete fitness yet; record repeats first";
          view.appendChild(empty);
          return;
        }
        throw failure;
      }
      return;
    }
    const lineage = await api.lineage();
    renderLineage(view, lineage);
  }

  async function refresh(): Promise<void> {
    try {
      summary = await api.campaign();
      status.textContent = statusLabel(summary);
      advance.disabled = !canAdvance(summary);
      toast.textContent = "";
      await renderActive();
    } catch (failure) {
      toast.textContent = toastText(failure);
    }
  }

  advance.addEventListener("click", () => {
    advance.disabled = true;
    api
      .advance()
      .then(() => refresh())
      .catch((failure: unknown) => {
        toast.textContent = toastText(failure);
        advance.disabled = summary === null || !canAdvance(summary);
      });
  });

  tabButtons.forEach((button, name) => {
    button.addEventListener("click", () => {
      activeTab = name;
      void renderActive().catch((failure: unknown) => {
        toast.textContent = toastText(failure);
      });
    });
  });

  let timer: ReturnType<typeof setInterval> | null = null;
  if (options.pollMs && options.pollMs > 0) {
    timer = setInterval(() => {
      // Background tabs skip the poll; state catches up on return.
      if (document.visibilityState === "visible") void refresh();
    }, options.pollMs);
  }

  return {
    refresh,
    async setTab(tab: TabName): Promise<void> {
      activeTab = tab;
      await renderActive();
    },
    stop(): void {
      if (timer !== null) clearInterval(timer);
    },
  };
}

function boot(): void {
  const root = document.getElementById("app");
  if (root === null) return;
  const base = new URLSearchParams(window.location.search).get("api") ?? "";
  const dashboard = createDashboard(root, new CampaignApi(base), {
    pollMs: 4000,
  });
  void dashboard.refresh();
}

boot();
