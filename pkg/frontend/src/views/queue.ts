// Violation queue: filterable by canon and severity; each violation's
// suggested fixes are buttons that post the corresponding decision.

import type { DecisionTemplate, Violation, ViolationsResponse } from "../types.js";

export interface QueueOptions {
  canonFilter?: string;
  severityFilter?: "error" | "warning";
  onApplyFix: (fix: DecisionTemplate) => void;
  onFilterChange?: (canon: string, severity: string) => void;
}

function fixLabel(fix: DecisionTemplate): string {
  const payload = fix.payload as { fix?: string; characteristic?: string; parent?: string };
  if (payload.fix === "set-override" && payload.characteristic) {
    return `split by ${payload.characteristic}`;
  }
  if (payload.fix === "insert-node") {
    return `insert class under ${payload.parent ?? "?"}`;
  }
  return fix.kind;
}

export function renderViolationQueue(
  violations: ViolationsResponse,
  options: QueueOptions,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "violation-queue";

  const report = violations.report;
  const summary = document.createElement("p");
  summary.className = "queue-summary";
  summary.dataset.errors = String(report.errors);
  summary.dataset.warnings = String(report.warnings);
  summary.textContent = `${report.errors} errors, ${report.warnings} warnings`;
  container.appendChild(summary);

  const filters = document.createElement("div");
  filters.className = "queue-filters";
  const canonSelect = document.createElement("select");
  canonSelect.className = "filter-canon";
  for (const canon of ["", ...Object.keys(report.counts).sort()]) {
    const option = document.createElement("option");
    option.value = canon;
    option.textContent = canon === "" ? "all canons" : `${canon} (${report.counts[canon]})`;
    if (canon === (options.canonFilter ?? "")) option.selected = true;
    canonSelect.appendChild(option);
  }
  const severitySelect = document.createElement("select");
  severitySelect.className = "filter-severity";
  for (const severity of ["", "error", "warning"]) {
    const option = document.createElement("option");
    option.value = severity;
    option.textContent = severity === "" ? "all severities" : severity;
    if (severity === (options.severityFilter ?? "")) option.selected = true;
    severitySelect.appendChild(option);
  }
  const applyFilters = () =>
    options.onFilterChange?.(canonSelect.value, severitySelect.value);
  canonSelect.addEventListener("change", applyFilters);
  severitySelect.addEventListener("change", applyFilters);
  filters.append(canonSelect, severitySelect);
  container.appendChild(filters);

  const list = document.createElement("ul");
  list.className = "queue-list";
  const visible = report.violations.filter(
    (v) =>
      (!options.canonFilter || v.canon === options.canonFilter) &&
      (!options.severityFilter || v.severity === options.severityFilter),
  );
  for (const violation of visible) {
    list.appendChild(renderViolation(violation, options));
  }
  container.appendChild(list);
  return container;
}

function renderViolation(violation: Violation, options: QueueOptions): HTMLLIElement {
  const li = document.createElement("li");
  li.className = `violation ${violation.severity}`;
  li.dataset.canon = violation.canon;

  const head = document.createElement("div");
  head.className = "violation-head";
  const canon = document.createElement("strong");
  canon.textContent = violation.canon;
  const where = document.createElement("code");
  where.textContent = violation.location;
  head.append(canon, " @ ", where, ` [${violation.severity}]`);
  li.appendChild(head);

  const text = document.createElement("p");
  text.textContent = violation.explanation;
  li.appendChild(text);

  if (violation.suggested_fixes.length > 0) {
    const fixes = document.createElement("div");
    fixes.className = "fixes";
    for (const fix of violation.suggested_fixes) {
      const button = document.createElement("button");
      button.className = "fix-button";
      button.textContent = fixLabel(fix);
      button.addEventListener("click", () => options.onApplyFix(fix));
      fixes.appendChild(button);
    }
    li.appendChild(fixes);
  }
  return li;
}
