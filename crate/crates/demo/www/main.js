import init, { toy_embedding, rectangle, pellet } from "./pkg/effparam_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Blue → yellow ramp on [0, 1].
function colour(t) {
  const r = Math.round(68 + 185 * t), g = Math.round(1 + 230 * t), b = Math.round(84 + (36 - 84) * t);
  return `rgb(${r},${g},${b})`;
}

function extent(v) {
  let lo = Infinity, hi = -Infinity;
  for (const x of v) { if (x < lo) lo = x; if (x > hi) hi = x; }
  return hi > lo ? [lo, hi] : [lo - 1, hi + 1];
}

function frame(canvas, xs, ys, pad = 34) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const [x0, x1] = extent(xs), [y0, y1] = extent(ys);
  const sx = (x) => pad + (x - x0) / (x1 - x0) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - (y - y0) / (y1 - y0) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, canvas.height - pad + 14);
  ctx.fillText(x1.toPrecision(3), canvas.width - pad - 24, canvas.height - pad + 14);
  ctx.fillText(y0.toPrecision(3), 2, canvas.height - pad);
  ctx.fillText(y1.toPrecision(3), 2, pad + 8);
  return { ctx, sx, sy };
}

function scatter(canvas, xs, ys, c, title) {
  const { ctx, sx, sy } = frame(canvas, xs, ys);
  const [c0, c1] = extent(c);
  for (let i = 0; i < xs.length; i++) {
    ctx.fillStyle = colour((c[i] - c0) / (c1 - c0));
    ctx.fillRect(sx(xs[i]) - 2, sy(ys[i]) - 2, 4, 4);
  }
  ctx.fillStyle = "#222";
  ctx.fillText(title, 40, 24);
}

function guard(outId, f) {
  return () => {
    const out = $(outId);
    out.classList.remove("error");
    out.textContent = "computing…";
    // Let the page repaint before the (blocking) computation.
    setTimeout(() => {
      try {
        const t = performance.now();
        const msg = f();
        out.textContent = `${msg}\n${(performance.now() - t).toFixed(0)} ms`;
      } catch (e) {
        out.classList.add("error");
        out.textContent = String(e.message ?? e);
      }
    }, 10);
  };
}

const fmt = (v, k = 6) => v.slice(0, k).map((x) => x.toFixed(4)).join(", ");

function runToy() {
  const r = JSON.parse(toy_embedding(num("toy-n"), num("toy-delta"), $("toy-kernel").value === "out", BigInt(num("toy-seed"))));
  scatter($("toy-canvas"), r.p1, r.p2, r.phi1, "p₂ vs p₁, coloured by φ₁");
  return `${r.p1.length} good points; eigenvalues ${fmt(r.eigenvalues)}`;
}

function runRect() {
  const r = JSON.parse(rectangle(1.0, num("rect-h"), num("rect-n"), BigInt(num("rect-seed"))));
  const [i, j] = r.selected;
  scatter($("rect-phi1"), r.x, r.y, r.phi1, `coloured by ψ_${i}`);
  scatter($("rect-phij"), r.x, r.y, r.phij, `coloured by ψ_${j ?? "?"}`);
  const scores = r.scores.map((s, k) => `ψ_${k + 1}: ${s.toFixed(3)}`).join("  ");
  return `selected ψ indices ${r.selected.join(", ")}\nresidual scores  ${scores}`;
}

function runPellet() {
  const r = JSON.parse(pellet(num("pel-beta"), num("pel-gamma"), num("pel-n")));
  const logphi = r.phi.map(Math.log10);
  const { ctx, sx, sy } = frame($("pel-canvas"), logphi, r.eta);
  ctx.strokeStyle = "#2a6";
  ctx.lineWidth = 2;
  ctx.beginPath();
  logphi.forEach((x, k) => (k ? ctx.lineTo(sx(x), sy(r.eta[k])) : ctx.moveTo(sx(x), sy(r.eta[k]))));
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText("η vs log₁₀ Φ", 40, 24);
  return `${r.eta.length} curve points, max η = ${Math.max(...r.eta).toFixed(4)}, ${r.gaps} unresolved Φ`;
}

await init();
$("toy-run").addEventListener("click", guard("toy-out", runToy));
$("rect-run").addEventListener("click", guard("rect-out", runRect));
$("pel-run").addEventListener("click", guard("pel-out", runPellet));
$("toy-run").click();
