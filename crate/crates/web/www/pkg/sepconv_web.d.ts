/* tslint:disable */
/* eslint-disable */

export class Filtered {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    cols(): number;
    full(): Float64Array;
    /**
     * Multiply-adds of the direct 2D correlation.
     */
    full_macs(): number;
    max_abs_diff(): number;
    rows(): number;
    separable(): Float64Array;
    /**
     * Multiply-adds of the column-then-row passes over all kept terms.
     */
    separable_macs(): number;
}

export class Truncation {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Row-major rank-r kernel.
     */
    approx(): Float64Array;
    /**
     * `r · (rows + cols)`.
     */
    factored_params(): number;
    full_params(): number;
    /**
     * `‖K − K_r‖ / ‖K‖`.
     */
    relative_residual(): number;
    singular_values(): Float64Array;
}

export class WaveFrames {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    dt(): number;
    /**
     * Row-major `n × n` displacement at step `t` (clamped).
     */
    frame(t: number): Float64Array;
    /**
     * Largest |u| over the whole run, for a fixed color scale.
     */
    peak(): number;
    /**
     * Nodes per axis.
     */
    size(): number;
    steps(): number;
    /**
     * `[x0, y0, nx, ny]` of the zone of interest in node indices.
     */
    zoom(): Uint32Array;
}

export function filter(field: Float64Array, rows: number, cols: number, kernel: Float64Array, k_rows: number, k_cols: number, rank: number): Filtered;

export function simulate(omega: number, xs: number, ys: number, n: number, nt: number): WaveFrames;

export function truncate(values: Float64Array, rows: number, cols: number, rank: number): Truncation;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_filtered_free: (a: number, b: number) => void;
    readonly __wbg_truncation_free: (a: number, b: number) => void;
    readonly __wbg_waveframes_free: (a: number, b: number) => void;
    readonly filter: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly filtered_cols: (a: number) => number;
    readonly filtered_full: (a: number) => [number, number];
    readonly filtered_full_macs: (a: number) => number;
    readonly filtered_max_abs_diff: (a: number) => number;
    readonly filtered_rows: (a: number) => number;
    readonly filtered_separable: (a: number) => [number, number];
    readonly filtered_separable_macs: (a: number) => number;
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly truncate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly truncation_approx: (a: number) => [number, number];
    readonly truncation_factored_params: (a: number) => number;
    readonly truncation_full_params: (a: number) => number;
    readonly truncation_relative_residual: (a: number) => number;
    readonly truncation_singular_values: (a: number) => [number, number];
    readonly waveframes_dt: (a: number) => number;
    readonly waveframes_frame: (a: number, b: number) => [number, number];
    readonly waveframes_peak: (a: number) => number;
    readonly waveframes_size: (a: number) => number;
    readonly waveframes_steps: (a: number) => number;
    readonly waveframes_zoom: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
