import init, { Demo } from "./pkg/mesrnn_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const NS = "http://www.w3.org/2000/svg";

let demo;
let scene;

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "err" : "";
}

function el(name, attrs) {
  const e = document.createElementNS(NS, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  return e;
}

// Fit every point into the plot and return a world -> pixel map.
function projection(points) {
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const span = Math.max(x1 - x0, y1 - y0, 1e-6);
  const s = 440 / span;
  return (p) => [20 + (p[0] - x0) * s, 460 - (p[1] - y0) * s];
}

function polyline(svg, pts, map, attrs) {
  if (pts.length < 2) return;
  svg.append(el("polyline", { points: pts.map((p) => map(p).join(",")).join(" "), fill: "none", ...attrs }));
}

function drawScene(highlight) {
  const svg = $("plot");
  svg.replaceChildren();
  const all = scene.peds.flatMap((p) => p.track.filter(Boolean));
  const map = projection(all);
  scene.peds.forEach((p, i) => {
    const color = COLORS[i % COLORS.length];
    polyline(svg, p.track.filter(Boolean), map, { stroke: color, "stroke-width": 2 });
    const start = map(p.track.find(Boolean));
    const label = el("text", { x: start[0] + 4, y: start[1] - 4, fill: color });
    label.textContent = i;
    svg.append(label);
  });
  for (const walk of highlight || []) {
    const pts = walk.map(([ped, t]) => scene.peds[ped].track[t]);
    polyline(svg, pts, map, { stroke: "#000", "stroke-width": 1.5, "stroke-dasharray": "4 3" });
    pts.forEach((q) => svg.append(el("circle", { cx: map(q)[0], cy: map(q)[1], r: 3, fill: "#000" })));
  }
}

function drawPrediction(result) {
  const svg = $("plot");
  svg.replaceChildren();
  const all = result.peds.flatMap((p) => [...p.observed, ...p.truth.filter(Boolean), ...p.predicted]);
  const map = projection(all);
  result.peds.forEach((p, i) => {
    const color = COLORS[i % COLORS.length];
    const last = p.observed[p.observed.length - 1];
    polyline(svg, p.observed, map, { stroke: color, "stroke-width": 2 });
    polyline(svg, [last, ...p.truth.filter(Boolean)], map, { stroke: color, "stroke-dasharray": "5 4" });
    polyline(svg, [last, ...p.predicted], map, { stroke: color, "stroke-width": 1, opacity: 0.8 });
    p.predicted.forEach((q) => svg.append(el("circle", { cx: map(q)[0], cy: map(q)[1], r: 2.5, fill: color })));
  });
}

function run(label, f) {
  try {
    status(label);
    f();
  } catch (e) {
    status(String(e.message || e), true);
  }
}

function generate() {
  run("", () => {
    scene = JSON.parse(demo.generate($("scenario").value, +$("peds").value, +$("seed").value));
    $("anchor").max = scene.peds.length - 1;
    $("step").max = scene.steps - 1;
    $("out").textContent = `${scene.peds.length} pedestrians over ${scene.steps} steps`;
    drawScene();
  });
}

function features() {
  run("", () => {
    const f = JSON.parse(demo.metapaths(+$("anchor").value, +$("step").value));
    const lines = [`anchor ${f.anchor} at step ${f.step}`];
    for (const [kind, items] of Object.entries(f.kinds)) {
      lines.push(`\n${kind}: ${items.length} instance(s)`);
      for (const it of items) {
        const walk = it.walk.map(([p, t]) => `(${p},${t})`).join(" -> ");
        lines.push(`  ${walk}  [${it.value.map((v) => v.toFixed(3)).join(", ")}]`);
      }
    }
    $("out").textContent = lines.join("\n");
    drawScene(Object.values(f.kinds).flat().map((it) => it.walk));
  });
}

function train() {
  status("training...");
  // let the status repaint before the blocking call
  setTimeout(() =>
    run("", () => {
      const t0 = performance.now();
      const r = JSON.parse(demo.train_and_predict($("variant").value, +$("scenes").value, +$("epochs").value));
      const secs = ((performance.now() - t0) / 1000).toFixed(1);
      $("out").textContent =
        `${r.variant}: ADE ${r.ade.toFixed(3)}  FDE ${r.fde.toFixed(3)}  (${secs}s)\n\nloss per epoch\n` +
        r.losses.map((l, i) => `  ${i + 1}: ${l.toExponential(3)}`).join("\n") +
        "\n\nsolid: observed, dashed: truth, dots: predicted";
      drawPrediction(r);
    }), 20);
}

await init();
demo = new Demo();
$("generate").onclick = generate;
$("features").onclick = features;
$("train").onclick = train;
generate();
