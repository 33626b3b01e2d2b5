// Taxonomy tree: collapsible hierarchy, preferred lemma per selected
// language, rank badge, basic-category badge, media thumbnails.

import type { TaxonomyNode, TaxonomyResponse } from "../types.js";

export interface TreeOptions {
  language: string;
  collapsed?: Set<string>;
  onToggle?: (nodeId: string, collapsed: boolean) => void;
}

export function nodeLabel(node: TaxonomyNode, language: string): string {
  return node.lemmas[language] ?? node.node_id;
}

function renderNode(
  node: TaxonomyNode,
  byId: Map<string, TaxonomyNode>,
  options: TreeOptions,
): HTMLLIElement {
  const li = document.createElement("li");
  li.className = "tree-node";
  li.dataset.nodeId = node.node_id;

  const row = document.createElement("div");
  row.className = "tree-row";

  const collapsed = options.collapsed?.has(node.node_id) ?? false;
  if (node.children.length > 0) {
    const toggle = document.createElement("button");
    toggle.className = "tree-toggle";
    toggle.textContent = collapsed ? "+" : "-";
    toggle.addEventListener("click", () => {
      options.onToggle?.(node.node_id, !collapsed);
    });
    row.appendChild(toggle);
  }

  const label = document.createElement("span");
  label.className = "tree-label";
  label.textContent = nodeLabel(node, options.language);
  row.appendChild(label);

  if (node.rank_label) {
    const rank = document.createElement("span");
    rank.className = "badge rank";
    rank.textContent = node.rank_label;
    row.appendChild(rank);
  }
  if (node.basic_category) {
    const basic = document.createElement("span");
    basic.className = "badge basic";
    basic.textContent = "basic";
    row.appendChild(basic);
  }
  if (node.concept_id !== null) {
    const cid = document.createElement("span");
    cid.className = "badge concept";
    cid.textContent = `#${node.concept_id}`;
    row.appendChild(cid);
  }

  const media = document.createElement("span");
  media.className = "thumbs";
  for (const ref of node.media_refs.slice(0, 6)) {
    const img = document.createElement("img");
    img.className = "thumb";
    img.src = ref;
    img.alt = ref;
    img.title = ref;
    media.appendChild(img);
  }
  row.appendChild(media);
  li.appendChild(row);

  if (node.children.length > 0 && !collapsed) {
    const ul = document.createElement("ul");
    ul.className = "tree-children";
    for (const childId of node.children) {
      const child = byId.get(childId);
      if (child) {
        ul.appendChild(renderNode(child, byId, options));
      }
    }
    li.appendChild(ul);
  }
  return li;
}

export function renderTaxonomyTree(
  taxonomy: TaxonomyResponse,
  options: TreeOptions,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "taxonomy-tree";

  const count = document.createElement("p");
  count.className = "tree-count";
  count.dataset.nodeCount = String(taxonomy.nodes.length);
  count.textContent = `${taxonomy.nodes.length} classes`;
  container.appendChild(count);

  if (taxonomy.root === null) {
    const empty = document.createElement("p");
    empty.className = "empty";
    empty.textContent = "No taxonomy built yet.";
    container.appendChild(empty);
    return container;
  }

  const byId = new Map(taxonomy.nodes.map((n) => [n.node_id, n]));
  const rootNode = byId.get(taxonomy.root);
  const ul = document.createElement("ul");
  ul.className = "tree-children";
  if (rootNode) {
    ul.appendChild(renderNode(rootNode, byId, options));
  }
  container.appendChild(ul);
  return container;
}
