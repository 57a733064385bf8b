import { describe, expect, it, vi } from "vitest";

import { CampaignApi } from "../src/api.js";
import { renderGeneration } from "../src/generation.js";
import type { CampaignSummary } from "../src/types.js";
import {
  jsonResponse,
  makeChild,
  makeGeneration,
  makeProfile,
  makeSummary,
} from "./helpers.js";

interface Harness {
  host: HTMLElement;
  posts: { input: string; body: unknown }[];
  onMutated: ReturnType<typeof vi.fn>;
}

function mount(summary: CampaignSummary): Harness {
  const posts: { input: string; body: unknown }[] = [];
  const fetchFn = (input: string, init?: RequestInit) => {
    if (init?.method === "POST") {
      posts.push({ input, body: JSON.parse(String(init.body)) });
      return Promise.resolve(jsonResponse(summary));
    }
    if (input.includes("/profile")) {
      return Promise.resolve(jsonResponse(makeProfile()));
    }
    throw new Error(`unexpected request: ${input}`);
  };
  const host = document.createElement("div");
  const onMutated = vi.fn();
  renderGeneration(host, summary, {
    api: new CampaignApi("", fetchFn),
    onMutated,
  });
  return { host, posts, onMutated };
}

function submitForce(card: Element, raw: string): void {
  const input = card.querySelector<HTMLInputElement>(
    '[data-testid="repeat-input"]',
  )!;
  input.value = raw;
  card
    .querySelector('[data-testid="repeat-form"]')!
    .dispatchEvent(new Event("submit", { cancelable: true }));
}

describe("renderGeneration", () => {
  it("shows one card per child in the newest generation", () => {
    const children = Array.from({ length: 5 }, (_, i) =>
      makeChild({ gripper_id: `child-${i}` }),
    );
    const { host } = mount(makeSummary([makeGeneration(children)]));
    expect(host.querySelectorAll('[data-testid="child-card"]')).toHaveLength(5);
    expect(host.querySelector("h2")?.textContent).toBe("generation 0");
  });

  it("fills repeat slots as measurements come in", () => {
    const child = makeChild({ repeats: [1.5, 2.0], repeats_required: 5 });
    const { host } = mount(makeSummary([makeGeneration([child])]));
    const slots = [...host.querySelectorAll('[data-testid="repeat-slot"]')];
    expect(slots).toHaveLength(5);
    expect(slots.filter((s) => s.classList.contains("filled"))).toHaveLength(2);
    expect(slots[0]?.textContent).toBe("1.50 N");
  });

  it("marks a fully measured child complete and drops its form", () => {
    const child = makeChild({
      repeats: [1, 2, 3, 4, 5],
      repeats_required: 5,
      fitness: 3.0,
    });
    const { host } = mount(makeSummary([makeGeneration([child])]));
    expect(host.querySelector('[data-testid="complete-badge"]')).not.toBeNull();
    expect(host.querySelector('[data-testid="repeat-form"]')).toBeNull();
    expect(host.querySelector('[data-testid="stl-link"]')).not.toBeNull();
    expect(host.querySelector(".fitness-line")?.textContent).toBe(
      "fitness: 3.000 N",
    );
  });

  it("shows unprintable children without form, slots or STL link", () => {
    const child = makeChild({ unprintable: true, repeats_required: 0 });
    const { host } = mount(makeSummary([makeGeneration([child])]));
    expect(
      host.querySelector('[data-testid="unprintable-badge"]'),
    ).not.toBeNull();
    expect(host.querySelector('[data-testid="repeat-form"]')).toBeNull();
    expect(host.querySelector('[data-testid="repeat-slot"]')).toBeNull();
    expect(host.querySelector('[data-testid="stl-link"]')).toBeNull();
  });

  it("rejects a negative force locally without any network call", async () => {
    const { host, posts, onMutated } = mount(
      makeSummary([makeGeneration([makeChild()])]),
    );
    const card = host.querySelector('[data-testid="child-card"]')!;
    submitForce(card, "-2");
    await vi.waitFor(() => {
      const error = card.querySelector('[data-testid="repeat-error"]');
      expect(error?.textContent).toContain("non-negative");
    });
    expect(posts).toHaveLength(0);
    expect(onMutated).not.toHaveBeenCalled();
  });

  it("posts a valid force for the right child and requests a refresh", async () => {
    const children = [makeChild(), makeChild({ gripper_id: "second" })];
    const { host, posts, onMutated } = mount(
      makeSummary([makeGeneration(children)]),
    );
    const cards = host.querySelectorAll('[data-testid="child-card"]');
    submitForce(cards[1]!, "2.5");
    await vi.waitFor(() => expect(onMutated).toHaveBeenCalledTimes(1));
    expect(posts).toEqual([
      {
        input: "/api/generations/0/children/1/repeats",
        body: { force_newtons: 2.5 },
      },
    ]);
  });

  it("renders the mirrored silhouette once the profile arrives", async () => {
    const { host } = mount(makeSummary([makeGeneration([makeChild()])]));
    await vi.waitFor(() => {
      const label = host.querySelector(".silhouette-label");
      expect(label?.textContent).toBe("r 30.0 mm  h 40.0 mm");
    });
    expect(host.querySelector("path.silhouette-profile")).not.toBeNull();
  });
});
