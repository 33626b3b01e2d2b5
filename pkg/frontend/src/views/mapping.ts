// Mapping panel: substance concept (its visual evidence) side by side with
// candidate classification concepts; confirming posts a confirm-mapping
// decision.

import type { ConceptRow, TaxonomyNode } from "../types.js";

export interface MappingOptions {
  language: string;
  onConfirm: (scId: string, conceptId: number) => void;
}

export interface MappingRow {
  node: TaxonomyNode;
  concept: ConceptRow | null;
}

export function mappingRows(nodes: TaxonomyNode[], concepts: ConceptRow[]): MappingRow[] {
  const byNode = new Map(concepts.map((c) => [c.node_ref, c]));
  return nodes.map((node) => ({ node, concept: byNode.get(node.node_id) ?? null }));
}

export function renderMappingPanel(
  rows: MappingRow[],
  options: MappingOptions,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "mapping-panel";

  const table = document.createElement("table");
  table.className = "mapping-table";
  const head = document.createElement("tr");
  for (const title of ["substance concept", "classification concept", "status", ""]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const { node, concept } of rows) {
    const tr = document.createElement("tr");
    tr.className = "mapping-row";
    tr.dataset.nodeId = node.node_id;

    const substance = document.createElement("td");
    substance.className = "substance-side";
    const scLabel = document.createElement("code");
    scLabel.textContent = node.sc_ref;
    substance.appendChild(scLabel);
    const thumbs = document.createElement("div");
    thumbs.className = "thumbs";
    for (const ref of node.media_refs.slice(0, 4)) {
      const img = document.createElement("img");
      img.className = "thumb";
      img.src = ref;
      img.alt = ref;
      thumbs.appendChild(img);
    }
    substance.appendChild(thumbs);
    tr.appendChild(substance);

    const classification = document.createElement("td");
    classification.className = "classification-side";
    const lemma = node.lemmas[options.language] ?? node.node_id;
    classification.textContent =
      concept === null ? `${lemma} (unminted)` : `#${concept.concept_id} ${lemma}`;
    tr.appendChild(classification);

    const status = document.createElement("td");
    status.className = "mapping-status";
    if (concept === null) {
      status.textContent = "unminted";
    } else if (concept.mapped_sc === node.sc_ref) {
      status.textContent = "confirmed";
    } else if (concept.mapped_sc) {
      status.textContent = `mapped to ${concept.mapped_sc}`;
    } else {
      status.textContent = "unconfirmed";
    }
    tr.appendChild(status);

    const actions = document.createElement("td");
    if (concept !== null && concept.mapped_sc !== node.sc_ref) {
      const confirm = document.createElement("button");
      confirm.className = "confirm-mapping";
      confirm.textContent = "confirm";
      confirm.addEventListener("click", () =>
        options.onConfirm(node.sc_ref, concept.concept_id),
      );
      actions.appendChild(confirm);
    }
    tr.appendChild(actions);
    table.appendChild(tr);
  }
  container.appendChild(table);
  return container;
}
