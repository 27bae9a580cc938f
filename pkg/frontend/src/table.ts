/** The control panel's data table: one checkbox row per experiment with its
 * summary statistics. */

import { ExperimentEntry } from "./types";

const COLUMNS = ["plot", "id", "name", "min", "mean", "max", "center", "argmin", "masked"];

function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined || !Number.isFinite(value)) return "-";
  return Number(value.toPrecision(4)).toString();
}

export function renderTable(
  container: HTMLElement,
  experiments: ExperimentEntry[],
  isSelected: (id: string) => boolean,
  onToggle: (id: string, checked: boolean) => void,
): void {
  container.textContent = "";
  if (experiments.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-note";
    empty.textContent = "no experiments loaded; use Load to add a CSV";
    container.appendChild(empty);
    return;
  }
  const table = document.createElement("table");
  table.className = "data-table";
  const head = table.createTHead().insertRow();
  for (const column of COLUMNS) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const exp of experiments) {
    const row = body.insertRow();
    row.dataset.id = exp.id;
    const checkboxCell = row.insertCell();
    const checkbox = document.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = isSelected(exp.id);
    checkbox.addEventListener("change", () => onToggle(exp.id, checkbox.checked));
    checkboxCell.appendChild(checkbox);
    const stats = exp.stats;
    const cells = [
      exp.id,
      exp.name,
      fmt(stats?.min_loss),
      fmt(stats?.mean_loss),
      fmt(stats?.max_loss),
      fmt(stats?.center_loss),
      stats ? `(${fmt(stats.argmin_x)}, ${fmt(stats.argmin_y)})` : "-",
      stats ? String(stats.masked_count) : "-",
    ];
    for (const text of cells) {
      row.insertCell().textContent = text;
    }
  }
  container.appendChild(table);
}
