import type { CampaignApi } from "./api.js";
import { ApiError } from "./api.js";
import type { CampaignSummary, ChildDoc } from "./types.js";
import { silhouetteSvg } from "./silhouette.js";
import {
  childComplete,
  currentGeneration,
  formatFitness,
  parseForce,
  repeatSlots,
} from "./viewmodel.js";

export interface GenerationDeps {
  api: CampaignApi;
  /** Called after any successful server mutation so the page can refetch. */
  onMutated: () => void;
}

function repeatStrip(child: ChildDoc): HTMLElement {
  const strip = document.createElement("div");
  strip.className = "repeat-strip";
  for (const slot of repeatSlots(child)) {
    const cell = document.createElement("span");
    cell.setAttribute("data-testid", "repeat-slot");
    cell.className = slot === null ? "repeat-slot empty" : "repeat-slot filled";
    cell.textContent = slot === null ? "–" : `${slot.toFixed(2)} N`;
    strip.appendChild(cell);
  }
  return strip;
}

function repeatForm(
  generationIndex: number,
  childIndex: number,
  deps: GenerationDeps,
): HTMLFormElement {
  const form = document.createElement("form");
  form.setAttribute("data-testid", "repeat-form");
  form.className = "repeat-form";

  const input = document.createElement("input");
  input.setAttribute("data-testid", "repeat-input");
  input.type = "text";
  input.placeholder = "force (N)";
  input.setAttribute("aria-label", "measured retention force in newtons");
  form.appendChild(input);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "record repeat";
  form.appendChild(submit);

  const error = document.createElement("span");
  error.setAttribute("data-testid", "repeat-error");
  error.className = "repeat-error";
  form.appendChild(error);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    error.textContent = "";
    const force = parseForce(input.value);
    if (force === null) {
      // Bad input never leaves the client; the server would 400 it anyway.
      error.textContent = "enter a non-negative force in newtons";
      return;
    }
    submit.disabled = true;
    deps.api
      .recordRepeat(generationIndex, childIndex, force)
      .then(() => {
        input.value = "";
        deps.onMutated();
      })
      .catch((failure: unknown) => {
        if (failure instanceof ApiError) {
          error.textContent = `[${failure.code}] ${failure.message}`;
        } else {
          error.textContent = String(failure);
        }
      })
      .finally(() => {
        submit.disabled = false;
      });
  });

  return form;
}

function childCard(
  generationIndex: number,
  childIndex: number,
  child: ChildDoc,
  deps: GenerationDeps,
): HTMLElement {
  const card = document.createElement("article");
  card.setAttribute("data-testid", "child-card");
  card.className = "child-card";

  const title = document.createElement("h3");
  title.textContent = `${child.gripper_id}`;
  card.appendChild(title);

  const figure = document.createElement("div");
  figure.className = "silhouette-box";
  figure.textContent = "loading profile…";
  card.appendChild(figure);
  deps.api
    .profile(generationIndex, childIndex, 65)
    .then((profile) => {
      figure.textContent = "";
      figure.appendChild(silhouetteSvg(profile));
    })
    .catch(() => {
      figure.textContent = "profile unavailable";
    });

  const fitness = document.createElement("p");
  fitness.className = "fitness-line";
  fitness.textContent = `fitness: ${formatFitness(child.fitness)}`;
  card.appendChild(fitness);

  if (child.unprintable) {
    const badge = document.createElement("span");
    badge.setAttribute("data-testid", "unprintable-badge");
    badge.className = "badge unprintable";
    badge.textContent = "unprintable";
    card.appendChild(badge);
    return card;
  }

  card.appendChild(repeatStrip(child));

  if (childComplete(child)) {
    const badge = document.createElement("span");
    badge.setAttribute("data-testid", "complete-badge");
    badge.className = "badge complete";
    badge.textContent = "complete";
    card.appendChild(badge);
  } else {
    card.appendChild(repeatForm(generationIndex, childIndex, deps));
  }

  const stl = document.createElement("a");
  stl.setAttribute("data-testid", "stl-link");
  stl.href = deps.api.stlUrl(generationIndex, childIndex);
  stl.textContent = "download STL";
  stl.setAttribute("download", `${child.gripper_id}.stl`);
  card.appendChild(stl);

  return card;
}

export function renderGeneration(
  container: HTMLElement,
  summary: CampaignSummary,
  deps: GenerationDeps,
): void {
  container.textContent = "";
  const generation = currentGeneration(summary);

  const heading = document.createElement("h2");
  heading.textContent = `generation ${generation.index}`;
  container.appendChild(heading);

  const grid = document.createElement("div");
  grid.className = "child-grid";
  generation.children.forEach((child, childIndex) => {
    grid.appendChild(childCard(generation.index, childIndex, child, deps));
  });
  container.appendChild(grid);
}
