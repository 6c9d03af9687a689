// View-state controller. Holds the current selection, issues API calls,
// and pushes rendered fragments into the page via an injected sink so the
// whole flow is testable without a DOM.
//
// Every fetch is tagged with a sequence number per panel; a response is
// dropped if a newer request for that panel was issued while it was in
// flight, so rapid selection changes can never paint stale data.

import { ApiClient, ApiError } from "./api.js";
import type { Assessment, LocationSummary, Purpose, ViewState } from "./types.js";
import {
  renderAssessment,
  renderChart,
  renderLocationList,
  renderMap,
  renderPurposeSelector,
} from "./render.js";

export interface ViewSink {
  setLocationList(html: string): void;
  setMap(html: string): void;
  setAssessment(html: string): void;
  setPurposeOptions(html: string): void;
  setChart(html: string): void;
  setError(message: string): void;
}

type Panel = "locations" | "assessment" | "chart";

export class AppController {
  state: ViewState = {
    selectedLocation: null,
    selectedPurpose: "",
    selectedParameter: null,
    chartWindow: {
      from: "2016-01-01T00:00:00Z",
      to: "2017-01-01T00:00:00Z",
      max_points: 200,
    },
  };

  private locations: LocationSummary[] = [];
  private purposes: Purpose[] = [];
  private lastAssessment: Assessment | null = null;
  private filter = "";
  private seq: Record<Panel, number> = { locations: 0, assessment: 0, chart: 0 };

  constructor(
    private api: ApiClient,
    private sink: ViewSink,
  ) {}

  /** True when no newer request for `panel` started after `ticket`. */
  private fresh(panel: Panel, ticket: number): boolean {
    return this.seq[panel] === ticket;
  }

  private report(err: unknown): void {
    if (err instanceof ApiError) {
      this.sink.setError(`${err.code}: ${err.message}`);
    } else {
      this.sink.setError(String(err));
    }
  }

  async start(): Promise<void> {
    const ticket = ++this.seq.locations;
    try {
      const [locations, purposes] = await Promise.all([
        this.api.listLocations(),
        this.api.getPurposes(),
      ]);
      if (!this.fresh("locations", ticket)) return;
      this.locations = locations;
      this.purposes = purposes;
      const def = purposes.find((p) => p.default) ?? purposes[0];
      if (def && !this.state.selectedPurpose) {
        this.state.selectedPurpose = def.id;
      }
      this.sink.setPurposeOptions(renderPurposeSelector(purposes, this.state.selectedPurpose));
      this.paintLocations();
    } catch (err) {
      this.report(err);
    }
  }

  private paintLocations(): void {
    this.sink.setLocationList(
      renderLocationList(this.locations, this.state.selectedLocation, this.filter),
    );
    this.sink.setMap(renderMap(this.locations, this.state.selectedLocation));
  }

  setFilter(text: string): void {
    this.filter = text;
    this.paintLocations();
  }

  async selectLocation(id: string): Promise<void> {
    this.state.selectedLocation = id;
    this.paintLocations();
    await this.refreshAssessment();
  }

  async selectPurpose(purposeId: string): Promise<void> {
    this.state.selectedPurpose = purposeId;
    this.sink.setPurposeOptions(renderPurposeSelector(this.purposes, purposeId));
    await this.refreshAssessment();
  }

  async refreshAssessment(): Promise<void> {
    const id = this.state.selectedLocation;
    if (!id) return;
    const ticket = ++this.seq.assessment;
    try {
      const a = await this.api.getAssessment(id, this.state.selectedPurpose || undefined);
      if (!this.fresh("assessment", ticket)) return;
      this.lastAssessment = a;
      this.sink.setAssessment(renderAssessment(a));
    } catch (err) {
      if (!this.fresh("assessment", ticket)) return;
      this.report(err);
    }
  }

  async selectParameter(parameter: string): Promise<void> {
    const id = this.state.selectedLocation;
    if (!id) return;
    this.state.selectedParameter = parameter;
    const ticket = ++this.seq.chart;
    const w = this.state.chartWindow;
    try {
      const points = await this.api.getSeries(id, parameter, w.from, w.to, w.max_points);
      if (!this.fresh("chart", ticket)) return;
      const entry = this.lastAssessment?.entries.find((e) => e.parameter === parameter);
      this.sink.setChart(renderChart(points, entry?.range ?? null));
    } catch (err) {
      if (!this.fresh("chart", ticket)) return;
      this.report(err);
    }
  }
}
