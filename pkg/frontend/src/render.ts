// Pure view rendering: every function maps API response data to an HTML or
// SVG string. No safety rules live here - highlighting and red/unsafe
// styling derive exclusively from the `relevant` and `status` fields the
// server sends, so a config change on the server is the only thing that
// can change a verdict.

import type {
  Assessment,
  AssessmentEntry,
  LocationSummary,
  Purpose,
  ReconciledRange,
  SeriesPoint,
} from "./types.js";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// -- location picker -------------------------------------------------------

export function renderLocationList(
  locations: LocationSummary[],
  selectedId: string | null,
  filter = "",
): string {
  const needle = filter.trim().toLowerCase();
  const rows = locations
    .filter((l) => !needle || l.name.toLowerCase().includes(needle))
    .map((l) => {
      const cls = l.id === selectedId ? "loc-row selected" : "loc-row";
      const when = l.latest_timestamp ? esc(l.latest_timestamp) : "no data yet";
      return `<li class="${cls}" data-id="${esc(l.id)}">
        <span class="loc-name">${esc(l.name)}</span>
        <span class="loc-meta">${l.parameter_count} parameters &middot; ${when}</span>
      </li>`;
    });
  if (rows.length === 0) {
    return `<li class="empty-state">No locations available</li>`;
  }
  return rows.join("\n");
}

export function renderMap(
  locations: LocationSummary[],
  selectedId: string | null,
  width = 640,
  height = 420,
): string {
  if (locations.length === 0) {
    return `<svg viewBox="0 0 ${width} ${height}" class="map">
      <text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="empty-state">No locations available</text>
    </svg>`;
  }
  const lats = locations.map((l) => l.latitude);
  const lons = locations.map((l) => l.longitude);
  const pad = 0.02;
  const minLat = Math.min(...lats) - pad;
  const maxLat = Math.max(...lats) + pad;
  const minLon = Math.min(...lons) - pad;
  const maxLon = Math.max(...lons) + pad;
  const x = (lon: number) => ((lon - minLon) / (maxLon - minLon)) * (width - 20) + 10;
  const y = (lat: number) => height - (((lat - minLat) / (maxLat - minLat)) * (height - 20) + 10);
  const markers = locations
    .map((l) => {
      const cls = l.id === selectedId ? "marker selected" : "marker";
      return `<circle class="${cls}" data-id="${esc(l.id)}" cx="${x(l.longitude).toFixed(1)}" cy="${y(
        l.latitude,
      ).toFixed(1)}" r="6"><title>${esc(l.name)}</title></circle>`;
    })
    .join("\n");
  return `<svg viewBox="0 0 ${width} ${height}" class="map">\n${markers}\n</svg>`;
}

// -- assessment panel ------------------------------------------------------

function violatedBound(e: AssessmentEntry): string {
  if (!e.range) return "";
  if (e.status === "UNSAFE_LOW" && e.range.min !== null) {
    return `below safe minimum ${e.range.min}`;
  }
  if (e.status === "UNSAFE_HIGH" && e.range.max !== null) {
    return `above safe maximum ${e.range.max}`;
  }
  return "";
}

function rangeText(r: ReconciledRange | null): string {
  if (!r) return "";
  const lo = r.min === null ? "" : String(r.min);
  const hi = r.max === null ? "" : String(r.max);
  return `[${lo} .. ${hi}]`;
}

export function renderAssessment(a: Assessment): string {
  const rows = a.entries.map((e) => {
    const classes = ["param-row"];
    let statusHtml: string;
    switch (e.status) {
      case "UNSAFE_LOW":
      case "UNSAFE_HIGH":
        classes.push("unsafe");
        statusHtml = `<span class="status unsafe">&#9888; ${esc(violatedBound(e) || e.status)}</span>`;
        break;
      case "SAFE":
        statusHtml = `<span class="status safe">&#10003; safe</span>`;
        break;
      case "NO_DATA":
        statusHtml = `<span class="status no-data">no reading</span>`;
        break;
      default:
        statusHtml = `<span class="status not-applicable">&ndash;</span>`;
    }
    if (e.relevant) classes.push("relevant");
    const star = e.relevant ? `<span class="relevant-icon" title="relevant to purpose">&#9733;</span>` : "";
    const value = e.value === null ? "" : String(e.value);
    const when = e.timestamp ? esc(e.timestamp) : "";
    return `<tr class="${classes.join(" ")}" data-parameter="${esc(e.parameter)}">
      <td>${star} ${esc(e.parameter)}</td>
      <td class="value">${esc(value)}</td>
      <td class="range">${esc(rangeText(e.range))}</td>
      <td>${statusHtml}</td>
      <td class="when">${when}</td>
    </tr>`;
  });
  return `<table class="assessment">
    <thead><tr><th>parameter</th><th>latest</th><th>safe range</th><th>status</th><th>reported</th></tr></thead>
    <tbody>\n${rows.join("\n")}\n</tbody>
  </table>`;
}

export function renderPurposeSelector(purposes: Purpose[], selectedId: string): string {
  return purposes
    .map((p) => {
      const sel = p.id === selectedId ? " selected" : "";
      const mark = p.default ? " (default)" : "";
      return `<option value="${esc(p.id)}"${sel}>${esc(p.name)}${mark}</option>`;
    })
    .join("\n");
}

// -- time-series chart -----------------------------------------------------

export function renderChart(
  points: SeriesPoint[],
  range: ReconciledRange | null,
  width = 640,
  height = 300,
): string {
  if (points.length === 0) {
    return `<svg viewBox="0 0 ${width} ${height}" class="chart">
      <text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="empty-state">No readings in window</text>
    </svg>`;
  }
  const ts = points.map((p) => Date.parse(p.t));
  const vs = points.map((p) => p.value);
  const bandVals = [range?.min, range?.max].filter((v): v is number => v != null);
  const lo = Math.min(...vs, ...bandVals);
  const hi = Math.max(...vs, ...bandVals);
  const spanV = hi - lo || 1;
  const t0 = Math.min(...ts);
  const spanT = Math.max(...ts) - t0 || 1;
  const x = (t: number) => ((t - t0) / spanT) * (width - 40) + 30;
  const y = (v: number) => height - 20 - ((v - lo) / spanV) * (height - 40);

  let band = "";
  if (range && (range.min !== null || range.max !== null)) {
    // an absent bound leaves that side of the band open to the plot edge
    const top = range.max !== null ? y(range.max) : 10;
    const bottom = range.min !== null ? y(range.min) : height - 20;
    band = `<rect class="safe-band" x="30" y="${top.toFixed(1)}" width="${width - 70}" height="${Math.max(
      bottom - top,
      0,
    ).toFixed(1)}"/>`;
  }
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(Date.parse(p.t)).toFixed(1)},${y(p.value).toFixed(1)}`)
    .join(" ");
  const dots = points
    .map(
      (p) =>
        `<circle class="pt" cx="${x(Date.parse(p.t)).toFixed(1)}" cy="${y(p.value).toFixed(1)}" r="3">` +
        `<title>${esc(p.t)}: ${p.value} (${p.count} reading${p.count === 1 ? "" : "s"})</title></circle>`,
    )
    .join("\n");
  return `<svg viewBox="0 0 ${width} ${height}" class="chart">
${band}
<path class="series-line" d="${path}" fill="none"/>
${dots}
</svg>`;
}

// -- standards screen ------------------------------------------------------

export function renderStandards(ranges: ReconciledRange[]): string {
  const rows = ranges.map(
    (r) => `<tr class="standard-row" data-parameter="${esc(r.parameter)}">
      <td>${esc(r.parameter)}</td>
      <td>${esc(r.purpose)}</td>
      <td>${esc(rangeText(r))}</td>
      <td>${esc(r.contributing_authorities.join(", "))}</td>
    </tr>`,
  );
  return `<table class="standards">
    <thead><tr><th>parameter</th><th>purpose</th><th>reconciled range</th><th>authorities</th></tr></thead>
    <tbody>\n${rows.join("\n")}\n</tbody>
  </table>`;
}
