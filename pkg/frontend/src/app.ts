// Application shell: four views over the curation service, re-rendered from
// fresh server responses after every decision. Holds no client-side truth
// beyond the last revision and cosmetic view state (tab, filters, collapse).

import { ApiClient, StaleRevisionError } from "./api.js";
import type { DecisionTemplate } from "./types.js";
import { renderTaxonomyTree } from "./views/tree.js";
import { renderViolationQueue } from "./views/queue.js";
import { defaultOrder, renderSuccessionWizard } from "./views/wizard.js";
import { mappingRows, renderMappingPanel } from "./views/mapping.js";

export type Tab = "tree" | "queue" | "wizard" | "mapping";

export class App {
  tab: Tab = "tree";
  language = "en";
  canonFilter = "";
  severityFilter = "";
  collapsed = new Set<string>();
  wizardOrder: string[] | null = null;
  notice: string | null = null;
  pendingRetry: { kind: string; payload: Record<string, unknown> } | null = null;

  constructor(
    readonly client: ApiClient,
    private readonly rootElement: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    const [taxonomy, violations] = await Promise.all([
      this.client.taxonomy(),
      this.client.violations(),
    ]);

    this.rootElement.replaceChildren();
    this.rootElement.appendChild(this.renderHeader(taxonomy.nodes.length, violations.report.errors));
    if (this.notice) {
      const banner = document.createElement("div");
      banner.className = "notice";
      banner.textContent = this.notice;
      if (this.pendingRetry) {
        const retry = document.createElement("button");
        retry.className = "retry-decision";
        retry.textContent = "retry";
        const { kind, payload } = this.pendingRetry;
        retry.addEventListener("click", () => void this.decide(kind, payload));
        banner.appendChild(retry);
      }
      this.rootElement.appendChild(banner);
    }

    const body = document.createElement("main");
    if (this.tab === "tree") {
      const languages = new Set<string>();
      for (const node of taxonomy.nodes) {
        for (const lang of Object.keys(node.lemmas)) {
          languages.add(lang);
        }
      }
      body.appendChild(this.renderLanguagePicker([...languages].sort()));
      body.appendChild(
        renderTaxonomyTree(taxonomy, {
          language: this.language,
          collapsed: this.collapsed,
          onToggle: (nodeId, nowCollapsed) => {
            if (nowCollapsed) {
              this.collapsed.add(nodeId);
            } else {
              this.collapsed.delete(nodeId);
            }
            void this.refresh();
          },
        }),
      );
    } else if (this.tab === "queue") {
      body.appendChild(
        renderViolationQueue(violations, {
          canonFilter: this.canonFilter || undefined,
          severityFilter: (this.severityFilter || undefined) as "error" | "warning" | undefined,
          onApplyFix: (fix: DecisionTemplate) => void this.decide(fix.kind, fix.payload),
          onFilterChange: (canon, severity) => {
            this.canonFilter = canon;
            this.severityFilter = severity;
            void this.refresh();
          },
        }),
      );
    } else if (this.tab === "wizard") {
      const candidates = await this.client.successionCandidates();
      const order = this.wizardOrder ?? defaultOrder(candidates.candidates);
      body.appendChild(
        renderSuccessionWizard(candidates, {
          order,
          onReorder: (next) => {
            this.wizardOrder = next;
            void this.refresh();
          },
          onApply: (succession) =>
            void this.decide("set-succession", {
              purpose_id: candidates.purpose_id,
              relevance_tag: candidates.purpose_id,
              succession,
              curated: true,
            }),
        }),
      );
    } else {
      const exported = await this.client.exportDocument();
      body.appendChild(
        renderMappingPanel(mappingRows(taxonomy.nodes, exported.concepts.concepts), {
          language: this.language,
          onConfirm: (scId, conceptId) =>
            void this.decide("confirm-mapping", { sc_id: scId, concept_id: conceptId }),
        }),
      );
    }
    this.rootElement.appendChild(body);
  }

  /** Post one decision; on staleness refetch and prompt the curator to retry. */
  async decide(kind: string, payload: Record<string, unknown>): Promise<void> {
    try {
      const result = await this.client.postDecision(kind, payload);
      this.notice = `applied ${result.decision_id}: ${result.errors} errors, ${result.warnings} warnings`;
      this.pendingRetry = null;
    } catch (error) {
      if (error instanceof StaleRevisionError) {
        this.notice = "store changed under you; review the fresh state and retry";
        this.pendingRetry = { kind, payload };
      } else {
        this.notice = `decision rejected: ${String(error)}`;
        this.pendingRetry = null;
      }
    }
    await this.refresh();
  }

  private renderHeader(nodeCount: number, errorCount: number): HTMLElement {
    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = "taxonomy curation";
    header.appendChild(title);

    const nav = document.createElement("nav");
    const tabs: Array<[Tab, string]> = [
      ["tree", `Taxonomy (${nodeCount})`],
      ["queue", `Violations (${errorCount})`],
      ["wizard", "Succession"],
      ["mapping", "Mapping"],
    ];
    for (const [tab, label] of tabs) {
      const button = document.createElement("button");
      button.className = `tab tab-${tab}` + (this.tab === tab ? " active" : "");
      button.textContent = label;
      button.addEventListener("click", () => {
        this.tab = tab;
        this.notice = null;
        void this.refresh();
      });
      nav.appendChild(button);
    }
    header.appendChild(nav);

    const revision = document.createElement("span");
    revision.className = "revision";
    revision.textContent = `rev ${this.client.revision ?? "?"}`;
    header.appendChild(revision);
    return header;
  }

  private renderLanguagePicker(languages: string[]): HTMLElement {
    const picker = document.createElement("select");
    picker.className = "language-picker";
    for (const lang of languages.length > 0 ? languages : [this.language]) {
      const option = document.createElement("option");
      option.value = lang;
      option.textContent = lang;
      if (lang === this.language) option.selected = true;
      picker.appendChild(option);
    }
    picker.addEventListener("change", () => {
      this.language = picker.value;
      void this.refresh();
    });
    return picker;
  }
}
