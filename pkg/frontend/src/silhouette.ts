import type { ProfileDoc } from "./types.js";

export interface SilhouetteGeometry {
  /** Closed SVG path of the mirrored meridian profile. */
  path: string;
  box: number;
  baselineY: number;
}

/**
 * Map the (radius, height) profile polyline into a square viewBox as a
 * mirrored silhouette: the revolved solid's designer-facing cross section.
 * Height runs up the screen; the base rim sits on the baseline.
 */
export function silhouetteGeometry(
  points: [number, number][],
  box = 120,
  pad = 10,
): SilhouetteGeometry {
  if (points.length < 2) throw new Error("profile needs at least two points");
  let maxR = 0;
  let maxZ = 0;
  for (const [r, z] of points) {
    maxR = Math.max(maxR, r);
    maxZ = Math.max(maxZ, z);
  }
  const scale = (box - 2 * pad) / Math.max(2 * maxR, maxZ, 1e-9);
  const cx = box / 2;
  const baselineY = box - pad;
  const x = (r: number) => cx + r * scale;
  const y = (z: number) => baselineY - z * scale;

  const fmt = (v: number) => v.toFixed(2);
  const segments: string[] = [];
  points.forEach(([r, z], index) => {
    segments.push(`${index === 0 ? "M" : "L"}${fmt(x(r))} ${fmt(y(z))}`);
  });
  // mirror back down the left side, skipping the duplicated apex
  for (let index = points.length - 2; index >= 0; index -= 1) {
    const [r, z] = points[index]!;
    segments.push(`L${fmt(cx - r * scale)} ${fmt(y(z))}`);
  }
  segments.push("Z");
  return { path: segments.join(" "), box, baselineY };
}

const SVG_NS = "http://www.w3.org/2000/svg";

/** Build the annotated silhouette SVG for one child profile. */
export function silhouetteSvg(profile: ProfileDoc, box = 120): SVGSVGElement {
  const geometry = silhouetteGeometry(profile.points, box);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${box} ${box}`);
  svg.setAttribute("class", "silhouette");

  const baseline = document.createElementNS(SVG_NS, "line");
  baseline.setAttribute("x1", "0");
  baseline.setAttribute("x2", String(box));
  baseline.setAttribute("y1", String(geometry.baselineY));
  baseline.setAttribute("y2", String(geometry.baselineY));
  baseline.setAttribute("class", "silhouette-baseline");
  svg.appendChild(baseline);

  const path = document.createElementNS(SVG_NS, "path");
  path.setAttribute("d", geometry.path);
  path.setAttribute("class", "silhouette-profile");
  svg.appendChild(path);

  const label = document.createElementNS(SVG_NS, "text");
  label.setAttribute("x", "4");
  label.setAttribute("y", "12");
  label.setAttribute("class", "silhouette-label");
  label.textContent =
    `r ${profile.base_radius_mm.toFixed(1)} mm  ` +
    `h ${profile.height_mm.toFixed(1)} mm`;
  svg.appendChild(label);
  return svg;
}
