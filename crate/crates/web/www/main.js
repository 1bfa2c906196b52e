import init, { simulate, truncate, filter } from "./pkg/sepconv_web.js";

const $ = (id) => document.getElementById(id);
let frames = null;
let kernel = { rows: 5, cols: 5, values: [] };

// diverging blue/white/red map on [-scale, scale]
function draw(canvas, values, rows, cols, scale) {
  const off = document.createElement("canvas");
  off.width = cols;
  off.height = rows;
  const ctx = off.getContext("2d");
  const img = ctx.createImageData(cols, rows);
  const s = scale > 0 ? scale : 1;
  for (let i = 0; i < rows * cols; i++) {
    const v = Math.max(-1, Math.min(1, values[i] / s));
    const a = Math.round(255 * (1 - Math.abs(v)));
    img.data[4 * i] = v > 0 ? 255 : a;
    img.data[4 * i + 1] = a;
    img.data[4 * i + 2] = v < 0 ? 255 : a;
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
  const c = canvas.getContext("2d");
  c.imageSmoothingEnabled = false;
  c.clearRect(0, 0, canvas.width, canvas.height);
  c.drawImage(off, 0, 0, canvas.width, canvas.height);
}

const maxAbs = (v) => v.reduce((m, x) => Math.max(m, Math.abs(x)), 0);

function showError(id, e) {
  $(id).textContent = e ? String(e.message ?? e) : "";
}

function currentFrame() {
  return frames.frame(Number($("t").value));
}

function drawWave() {
  if (!frames) return;
  const n = frames.size();
  const t = Number($("t").value);
  draw($("field"), currentFrame(), n, n, frames.peak() * 0.5);
  const [x0, y0, zx, zy] = frames.zoom();
  const c = $("field").getContext("2d");
  const px = $("field").width / n;
  c.strokeStyle = "#000";
  c.strokeRect(y0 * px, x0 * px, zy * px, zx * px);
  $("tlabel").textContent = `t = ${(t * frames.dt()).toFixed(3)}`;
  runFilter();
}

function runWave() {
  try {
    frames = simulate(
      Number($("omega").value), Number($("xs").value), Number($("ys").value),
      Number($("n").value), Number($("nt").value));
    $("t").max = frames.steps() - 1;
    $("t").value = Math.floor((frames.steps() - 1) * 0.7);
    showError("wave-err", null);
    drawWave();
  } catch (e) {
    showError("wave-err", e);
  }
}

const presets = {
  gauss: () => {
    const g = [1, 4, 6, 4, 1];
    return { rows: 5, cols: 5, values: g.flatMap((a) => g.map((b) => (a * b) / 256)) };
  },
  sobel: () => ({ rows: 3, cols: 3, values: [1, 0, -1, 2, 0, -2, 1, 0, -1] }),
  log: () => {
    const v = [];
    for (let i = -2; i <= 2; i++)
      for (let j = -2; j <= 2; j++) {
        const r2 = (i * i + j * j) / 2;
        v.push(Number(((r2 - 1) * Math.exp(-r2)).toFixed(4)));
      }
    return { rows: 5, cols: 5, values: v };
  },
  random: () => ({
    rows: 5, cols: 5,
    values: Array.from({ length: 25 }, () => Number((Math.random() * 2 - 1).toFixed(3))),
  }),
};

function loadPreset() {
  kernel = presets[$("preset").value]();
  const lines = [];
  for (let i = 0; i < kernel.rows; i++)
    lines.push(kernel.values.slice(i * kernel.cols, (i + 1) * kernel.cols).join(" "));
  $("kvals").value = lines.join("\n");
  runKernel();
}

function parseKernel() {
  const rows = $("kvals").value.trim().split("\n").map((l) => l.trim().split(/[\s,]+/).map(Number));
  const cols = rows[0].length;
  if (rows.some((r) => r.length !== cols || r.some((x) => !Number.isFinite(x))))
    throw new Error("every row needs the same number of numeric entries");
  return { rows: rows.length, cols, values: rows.flat() };
}

function runKernel() {
  try {
    kernel = parseKernel();
    const maxRank = Math.min(kernel.rows, kernel.cols);
    $("rank").max = maxRank;
    if (Number($("rank").value) > maxRank) $("rank").value = maxRank;
    const r = Number($("rank").value);
    $("rlabel").textContent = r;
    const res = truncate(new Float64Array(kernel.values), kernel.rows, kernel.cols, r);
    const scale = maxAbs(kernel.values);
    draw($("korig"), kernel.values, kernel.rows, kernel.cols, scale);
    draw($("kapprox"), res.approx(), kernel.rows, kernel.cols, scale);
    drawBars($("sv"), res.singular_values(), r);
    $("kstats").textContent =
      `relative residual ${res.relative_residual().toExponential(3)}\n` +
      `parameters: full ${res.full_params()}, factored ${res.factored_params()}`;
    showError("kernel-err", null);
    runFilter();
  } catch (e) {
    showError("kernel-err", e);
  }
}

function drawBars(canvas, sv, kept) {
  const c = canvas.getContext("2d");
  c.clearRect(0, 0, canvas.width, canvas.height);
  const top = sv[0] > 0 ? sv[0] : 1;
  const w = canvas.width / sv.length;
  sv.forEach((s, i) => {
    const h = (canvas.height - 4) * (s / top);
    c.fillStyle = i < kept ? "#c33" : "#bbb";
    c.fillRect(i * w + 2, canvas.height - h, w - 4, h);
  });
}

function runFilter() {
  if (!frames || !kernel.values.length) return;
  try {
    const n = frames.size();
    const r = Number($("rank").value);
    const res = filter(currentFrame(), n, n, new Float64Array(kernel.values), kernel.rows, kernel.cols, r);
    const full = res.full();
    const sep = res.separable();
    const diff = full.map((x, i) => x - sep[i]);
    const scale = maxAbs(full);
    draw($("ffull"), full, res.rows(), res.cols(), scale);
    draw($("fsep"), sep, res.rows(), res.cols(), scale);
    draw($("fdiff"), diff, res.rows(), res.cols(), scale);
    $("fstats").textContent =
      `max |full − separable| ${res.max_abs_diff().toExponential(3)} (output peak ${scale.toExponential(3)})\n` +
      `multiply-adds: full ${res.full_macs()}, separable ${res.separable_macs()}`;
    showError("filter-err", null);
  } catch (e) {
    showError("filter-err", e);
  }
}

await init();
$("run").addEventListener("click", runWave);
$("t").addEventListener("input", drawWave);
$("preset").addEventListener("change", loadPreset);
$("kvals").addEventListener("change", runKernel);
$("rank").addEventListener("input", runKernel);
loadPreset();
runWave();
