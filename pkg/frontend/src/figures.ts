/**
 * The six figure kinds: detection-rate and localization curves faceted the
 * way the reference plots lay them out (one panel per fixed size with SNR
 * on x, or one panel per fixed SNR with size on x), the threshold-vs-size
 * curve, and the per-algorithm operation-count bars.
 */

import { BarGroup, Panel, lineChart, barChart } from "./charts.js";
import { FlopsRow, SweepRow, ThresholdTable } from "./csv.js";

export const KINDS = [
  "md_snr",
  "iou_snr",
  "md_size",
  "iou_size",
  "thresholds",
  "flops",
] as const;

export type Kind = (typeof KINDS)[number];

type YField = "md_rate" | "iou_error_rate";
type FacetField = "signal_size" | "snr_db";

function facetPanels(
  rows: SweepRow[],
  facetField: FacetField,
  xField: FacetField,
  yField: YField,
  facetValues?: number[]
): Panel[] {
  const usable = rows.filter(
    (r) => r[yField] !== null && r[xField] !== null && r[facetField] !== null
  );
  if (usable.length === 0) {
    throw new Error(`no rows with ${yField}, ${xField} and ${facetField} set`);
  }
  let facets = [...new Set(usable.map((r) => r[facetField] as number))].sort(
    (a, b) => a - b
  );
  if (facetValues && facetValues.length > 0) {
    facets = facets.filter((f) => facetValues.includes(f));
    if (facets.length === 0) throw new Error("facet filter matched nothing");
  }
  const facetName = facetField === "signal_size" ? "size" : "SNR (dB)";
  return facets.map((facet) => {
    const inFacet = usable.filter((r) => r[facetField] === facet);
    const detectors = [...new Set(inFacet.map((r) => r.detector))];
    return {
      title: `${facetName} = ${facet}`,
      series: detectors.map((det) => ({
        label: det,
        points: inFacet
          .filter((r) => r.detector === det)
          .map((r) => ({ x: r[xField] as number, y: r[yField] as number })),
      })),
    };
  });
}

export function renderSweepFigure(
  kind: Kind,
  rows: SweepRow[],
  facetValues?: number[]
): string {
  switch (kind) {
    case "md_snr":
      return lineChart(
        facetPanels(rows, "signal_size", "snr_db", "md_rate", facetValues),
        { xLabel: "SNR (dB)", yLabel: "missed-detection rate" }
      );
    case "iou_snr":
      return lineChart(
        facetPanels(rows, "signal_size", "snr_db", "iou_error_rate", facetValues),
        { xLabel: "SNR (dB)", yLabel: "IoU error rate" }
      );
    case "md_size":
      return lineChart(
        facetPanels(rows, "snr_db", "signal_size", "md_rate", facetValues),
        { xLabel: "signal size", yLabel: "missed-detection rate", xLog: true }
      );
    case "iou_size":
      return lineChart(
        facetPanels(rows, "snr_db", "signal_size", "iou_error_rate", facetValues),
        { xLabel: "signal size", yLabel: "IoU error rate", xLog: true }
      );
    default:
      throw new Error(`not a sweep figure: ${kind}`);
  }
}

export function renderThresholdsFigure(table: ThresholdTable): string {
  const panel: Panel = {
    title: `mean-power thresholds (pfa=${table.pfa}, N=${table.n_total})`,
    series: [
      {
        label: "u",
        points: table.entries.map((e) => ({ x: e.ell, y: e.u })),
      },
    ],
  };
  return lineChart([panel], {
    xLabel: "region cardinality",
    yLabel: "threshold u",
    xLog: true,
  });
}

export function renderFlopsFigure(rows: FlopsRow[]): string {
  if (rows.length === 0) throw new Error("flops CSV has no rows");
  const shapes = [...new Set(rows.map((r) => r.shape))];
  // binary_total duplicates search + refine; plot the three distinct costs
  const wanted = ["exhaustive", "binary_search", "binary_refine"];
  const groups: BarGroup[] = shapes.map((shape) => ({
    label: shape,
    bars: rows
      .filter((r) => r.shape === shape && wanted.includes(r.algorithm) && r.flops > 0)
      .map((r) => ({ label: r.algorithm, value: r.flops })),
  }));
  return barChart(groups, {
    yLabel: "counted operations",
    title: "detection cost per algorithm",
  });
}
