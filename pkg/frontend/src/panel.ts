import type { CellPrediction, SeverityBin } from "./types.js";

/**
 * Per-cell detail panel.  Every number shown is the payload value verbatim
 * (String(x) of the parsed JSON number) — the panel does no model math, no
 * re-sorting, no renormalizing.  It only formats the USD bracket labels.
 */

/** Compact USD amount for bracket labels: 1000 -> "$1k", 1e7 -> "$10M". */
export function usdLabel(amount: number): string {
  if (amount >= 1e6) return `$${amount / 1e6}M`;
  if (amount >= 1e3) return `$${amount / 1e3}k`;
  return `$${amount}`;
}

/** Bracket label for one histogram bin; open-ended top bin gets a "+". */
export function binLabel(bin: SeverityBin): string {
  if (bin.hi_usd === null) return `${usdLabel(bin.lo_usd)}+`;
  return `${usdLabel(bin.lo_usd)}–${usdLabel(bin.hi_usd)}`;
}

export class DetailPanel {
  constructor(private readonly root: HTMLElement) {
    this.root.classList.add("detail-panel");
    this.clear();
  }

  clear(): void {
    this.root.innerHTML = "";
    this.root.dataset.state = "empty";
  }

  showLoading(geohash: string): void {
    this.root.innerHTML = "";
    this.root.dataset.state = "loading";
    const p = document.createElement("p");
    p.textContent = `Loading ${geohash}…`;
    this.root.appendChild(p);
  }

  showOutsideRegion(geohash: string): void {
    this.root.innerHTML = "";
    this.root.dataset.state = "outside";
    const p = document.createElement("p");
    p.className = "panel-error";
    p.textContent = `${geohash} is outside served region`;
    this.root.appendChild(p);
  }

  showError(message: string): void {
    this.root.innerHTML = "";
    this.root.dataset.state = "error";
    const p = document.createElement("p");
    p.className = "panel-error";
    p.textContent = message;
    this.root.appendChild(p);
  }

  render(pred: CellPrediction, respondents: string[] = []): void {
    this.root.innerHTML = "";
    this.root.dataset.state = "cell";
    this.root.dataset.geohash = pred.geohash;

    const title = document.createElement("h2");
    title.textContent = pred.geohash;
    this.root.appendChild(title);

    this.root.appendChild(this.statRow("Crime probability", "p_crime", pred.p_crime));
    this.root.appendChild(
      this.statRow("Expected fine (USD)", "expected_fine_usd", pred.expected_fine_usd),
    );

    this.root.appendChild(this.heading("Top Risk Likelihoods"));
    const list = document.createElement("ol");
    list.dataset.field = "top_risks";
    for (const [label, p] of pred.top_risks) {
      // payload order is the display order — the server already sorted
      const li = document.createElement("li");
      li.dataset.label = label;
      li.dataset.p = String(p);
      li.textContent = `${label}: ${String(p)}`;
      list.appendChild(li);
    }
    this.root.appendChild(list);

    this.root.appendChild(this.heading("Approximate Crime Severity"));
    this.root.appendChild(this.histogram(pred.severity_histogram));

    if (respondents.length > 0) {
      this.root.appendChild(this.heading("Historical records"));
      const note = document.createElement("p");
      note.className = "panel-note";
      note.textContent = "Respondents named in past incidents in this cell (records, not predictions).";
      this.root.appendChild(note);
      const ul = document.createElement("ul");
      ul.dataset.field = "respondents";
      for (const name of respondents) {
        const li = document.createElement("li");
        li.textContent = name;
        ul.appendChild(li);
      }
      this.root.appendChild(ul);
    }
  }

  private heading(text: string): HTMLElement {
    const h = document.createElement("h3");
    h.textContent = text;
    return h;
  }

  private statRow(label: string, field: string, value: number): HTMLElement {
    const row = document.createElement("p");
    const name = document.createElement("span");
    name.textContent = `${label}: `;
    const val = document.createElement("span");
    val.dataset.field = field;
    val.textContent = String(value);
    row.appendChild(name);
    row.appendChild(val);
    return row;
  }

  private histogram(bins: SeverityBin[]): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "severity-histogram";
    wrap.dataset.field = "severity_histogram";
    for (const bin of bins) {
      const col = document.createElement("div");
      col.className = "severity-bin";
      const bar = document.createElement("div");
      bar.className = "severity-bar";
      bar.dataset.mass = String(bin.mass);
      // bar height is proportional to the payload mass (masses sum to 1)
      bar.style.height = `${bin.mass * 100}%`;
      bar.title = binLabel(bin);
      const label = document.createElement("div");
      label.className = "severity-label";
      label.textContent = binLabel(bin);
      col.appendChild(bar);
      col.appendChild(label);
      wrap.appendChild(col);
    }
    return wrap;
  }
}
