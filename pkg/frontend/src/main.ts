// Browser bootstrap: wires the controller to the DOM. All rendering logic
// lives in render.ts / state.ts so this file is only event plumbing.

import { ApiClient } from "./api.js";
import { AppController, type ViewSink } from "./state.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function domSink(): ViewSink {
  return {
    setLocationList: (html) => (byId("location-list").innerHTML = html),
    setMap: (html) => (byId("map-panel").innerHTML = html),
    setAssessment: (html) => (byId("assessment-panel").innerHTML = html),
    setPurposeOptions: (html) => (byId("purpose-select").innerHTML = html),
    setChart: (html) => (byId("chart-panel").innerHTML = html),
    setError: (message) => {
      const el = byId("error-bar");
      el.textContent = message;
      el.classList.toggle("hidden", message === "");
    },
  };
}

function main(): void {
  const baseUrl = document.body.dataset.apiBase ?? "";
  const controller = new AppController(new ApiClient(baseUrl), domSink());

  byId("location-list").addEventListener("click", (ev) => {
    const row = (ev.target as HTMLElement).closest<HTMLElement>("[data-id]");
    if (row?.dataset.id) void controller.selectLocation(row.dataset.id);
  });
  byId("map-panel").addEventListener("click", (ev) => {
    const marker = (ev.target as HTMLElement).closest<HTMLElement>("[data-id]");
    if (marker?.dataset.id) void controller.selectLocation(marker.dataset.id);
  });
  byId("assessment-panel").addEventListener("click", (ev) => {
    const row = (ev.target as HTMLElement).closest<HTMLElement>("[data-parameter]");
    if (row?.dataset.parameter) void controller.selectParameter(row.dataset.parameter);
  });
  byId("purpose-select").addEventListener("change", (ev) => {
    void controller.selectPurpose((ev.target as HTMLSelectElement).value);
  });
  (byId("location-filter") as HTMLInputElement).addEventListener("input", (ev) => {
    controller.setFilter((ev.target as HTMLInputElement).value);
  });

  void controller.start();
}

main();
