// Succession wizard: order the gate-passing characteristics for a purpose
// (drag or nudge buttons), preview partition counts, apply as a
// set-succession decision.

import type { CandidatesResponse, SuccessionCandidate } from "../types.js";

export interface WizardOptions {
  order: string[]; // current working order (gate-passing names)
  onReorder: (order: string[]) => void;
  onApply: (order: string[]) => void;
}

export function defaultOrder(candidates: SuccessionCandidate[]): string[] {
  return candidates
    .filter((c) => c.passes)
    .sort((a, b) => b.partition_count - a.partition_count || a.name.localeCompare(b.name))
    .map((c) => c.name);
}

function moved(order: string[], name: string, delta: number): string[] {
  const index = order.indexOf(name);
  const target = index + delta;
  if (index < 0 || target < 0 || target >= order.length) {
    return order;
  }
  const next = order.slice();
  next.splice(index, 1);
  next.splice(target, 0, name);
  return next;
}

export function renderSuccessionWizard(
  candidates: CandidatesResponse,
  options: WizardOptions,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "succession-wizard";

  const heading = document.createElement("p");
  heading.textContent = `Characteristic succession for purpose "${candidates.purpose_id}"`;
  container.appendChild(heading);

  const byName = new Map(candidates.candidates.map((c) => [c.name, c]));
  const list = document.createElement("ol");
  list.className = "succession-order";

  let dragged: string | null = null;
  for (const name of options.order) {
    const candidate = byName.get(name);
    const li = document.createElement("li");
    li.className = "succession-item";
    li.dataset.name = name;
    li.draggable = true;
    li.addEventListener("dragstart", () => {
      dragged = name;
    });
    li.addEventListener("dragover", (event) => event.preventDefault());
    li.addEventListener("drop", () => {
      if (dragged && dragged !== name) {
        const next = options.order.filter((n) => n !== dragged);
        next.splice(next.indexOf(name), 0, dragged);
        options.onReorder(next);
      }
    });

    const label = document.createElement("span");
    label.textContent = name;
    li.appendChild(label);

    const partitions = document.createElement("span");
    partitions.className = "badge partitions";
    partitions.textContent = `${candidate?.partition_count ?? 0} classes`;
    li.appendChild(partitions);

    const up = document.createElement("button");
    up.className = "nudge-up";
    up.textContent = "up";
    up.addEventListener("click", () => options.onReorder(moved(options.order, name, -1)));
    const down = document.createElement("button");
    down.className = "nudge-down";
    down.textContent = "down";
    down.addEventListener("click", () => options.onReorder(moved(options.order, name, +1)));
    li.append(up, down);
    list.appendChild(li);
  }
  container.appendChild(list);

  const rejected = candidates.candidates.filter((c) => !c.passes);
  if (rejected.length > 0) {
    const aside = document.createElement("p");
    aside.className = "gated-out";
    aside.textContent =
      "Gated out: " +
      rejected
        .map((c) => `${c.name} (${c.gate.map((v) => v.canon).join(", ")})`)
        .join("; ");
    container.appendChild(aside);
  }

  const apply = document.createElement("button");
  apply.className = "apply-succession";
  apply.textContent = "Apply succession";
  apply.addEventListener("click", () => options.onApply(options.order));
  container.appendChild(apply);
  return container;
}
