// Wire types mirroring the v1 API JSON bodies.

export interface LocationSummary {
  id: string;
  name: string;
  latitude: number;
  longitude: number;
  altitude?: number;
  basin?: string;
  parameter_count: number;
  latest_timestamp: string | null;
}

export type SafetyStatus =
  | "SAFE"
  | "UNSAFE_LOW"
  | "UNSAFE_HIGH"
  | "NO_DATA"
  | "NOT_APPLICABLE";

export interface ReconciledRange {
  parameter: string;
  purpose: string;
  min: number | null;
  max: number | null;
  contributing_authorities: string[];
}

export interface AssessmentEntry {
  parameter: string;
  relevant: boolean;
  status: SafetyStatus;
  value: number | null;
  timestamp: string | null;
  range: ReconciledRange | null;
}

export interface Assessment {
  location_id: string;
  purpose: string;
  as_of: string | null;
  entries: AssessmentEntry[];
}

export interface Purpose {
  id: string;
  name: string;
  relevant_parameters: string[];
  default: boolean;
}

export interface ParameterInfo {
  code: string;
  name: string;
  unit: string;
  plausible_min: number | null;
  plausible_max: number | null;
  description: string;
}

export interface SeriesPoint {
  t: string;
  value: number;
  count: number;
}

export interface ChartWindow {
  from: string;
  to: string;
  max_points: number;
}

export interface ViewState {
  selectedLocation: string | null;
  selectedPurpose: string;
  selectedParameter: string | null;
  chartWindow: ChartWindow;
}
