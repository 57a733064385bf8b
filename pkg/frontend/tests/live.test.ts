import { describe, expect, it, vi } from "vitest";

import { ApiError, CampaignApi } from "../src/api.js";
import { edgesAreLayered } from "../src/lineage.js";
import { createDashboard } from "../src/main.js";
import { splitCsv } from "../src/trends.js";
import type { ReportRow } from "../src/types.js";

/**
 * End-to-end drive of a real campaign server, enabled by pointing
 * DASHBOARD_API at a freshly initialised manual campaign (population 5,
 * 5 repeats per child). Exercises measurement entry, the advance gate,
 * and report consistency purely through the rendered UI.
 */
const BASE = process.env.DASHBOARD_API ?? "";

describe.skipIf(BASE === "")("dashboard against a live server", () => {
  const api = new CampaignApi(BASE);

  function cards(root: HTMLElement): Element[] {
    return [...root.querySelectorAll('[data-testid="child-card"]')];
  }

  function filledSlots(card: Element): number {
    return card.querySelectorAll('[data-testid="repeat-slot"].filled').length;
  }

  it("runs one full manual generation through the UI", { timeout: 120000 }, async () => {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const dashboard = createDashboard(root, api);
    await dashboard.refresh();

    const statusLine = () =>
      root.querySelector('[data-testid="status-line"]')?.textContent ?? "";
    const advance = root.querySelector<HTMLButtonElement>(
      '[data-testid="advance-button"]',
    )!;

    expect(statusLine()).toContain("generation 1 of");
    expect(statusLine()).toContain("awaiting-fitness");
    expect(advance.disabled).toBe(true);
    expect(cards(root)).toHaveLength(5);

    // enter five forces per child, one at a time, through the form
    let entered = 0;
    for (let child = 0; child < 5; child += 1) {
      for (let repeat = 0; repeat < 5; repeat += 1) {
        const card = cards(root)[child]!;
        const input = card.querySelector<HTMLInputElement>(
          '[data-testid="repeat-input"]',
        )!;
        const force = 1 + child * 0.5 + repeat * 0.05;
        input.value = force.toFixed(2);
        card
          .querySelector('[data-testid="repeat-form"]')!
          .dispatchEvent(new Event("submit", { cancelable: true }));
        entered += 1;
        await vi.waitFor(
          () => {
            const current = cards(root)[child]!;
            expect(filledSlots(current)).toBe(repeat + 1);
          },
          { timeout: 10000 },
        );
      }
      await vi.waitFor(() => {
        const current = cards(root)[child]!;
        expect(
          current.querySelector('[data-testid="complete-badge"]'),
        ).not.toBeNull();
      });
    }
    expect(entered).toBe(25);

    // 25 recorded measurements flip the campaign to ready-to-advance
    await vi.waitFor(() => expect(statusLine()).toContain("ready-to-advance"));
    expect(advance.disabled).toBe(false);

    // the server rejects a bad force on its own, not just the client
    const printable = (await api.campaign()).generations[0]!.children.findIndex(
      (c) => !c.unprintable,
    );
    const rejection = await api
      .recordRepeat(0, printable, -1)
      .catch((e: unknown) => e);
    expect(rejection).toBeInstanceOf(ApiError);

    // advancing from the UI creates generation 2
    advance.click();
    await vi.waitFor(() => expect(statusLine()).toContain("generation 2 of"), {
      timeout: 30000,
    });
    const summary = await api.campaign();
    expect(summary.generations).toHaveLength(2);
    expect(advance.disabled).toBe(true);

    // trends table shows exactly what the CSV endpoint says
    await dashboard.setTab("trends");
    await vi.waitFor(() =>
      expect(
        root.querySelector('[data-testid="report-table"]'),
      ).not.toBeNull(),
    );
    const csv = await api.reportCsv();
    const tableCells = [...root.querySelectorAll("table tr")].map((tr) =>
      [...tr.children].map((cell) => cell.textContent ?? ""),
    );
    expect(tableCells).toEqual(splitCsv(csv));

    const report = await api.reportJson();
    const bodyRows = tableCells.slice(1);
    expect(bodyRows).toHaveLength(report.rows.length);
    bodyRows.forEach((cells, r) => {
      const jsonRow = report.rows[r]!;
      report.columns.forEach((column, c) => {
        const value = jsonRow[column as keyof ReportRow];
        if (value === null) {
          expect(cells[c]).toBe("");
        } else {
          expect(Number(cells[c])).toBe(value);
        }
      });
    });

    // lineage stays layered: parents feed only the next generation
    await dashboard.setTab("lineage");
    await vi.waitFor(() =>
      expect(
        root.querySelector('[data-testid="lineage-graph"]'),
      ).not.toBeNull(),
    );
    const lineage = await api.lineage();
    expect(lineage.nodes).toHaveLength(10);
    expect(edgesAreLayered(lineage)).toBe(true);

    document.body.removeChild(root);
  });
});
