/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_filtered_free: (a: number, b: number) => void;
export const __wbg_truncation_free: (a: number, b: number) => void;
export const __wbg_waveframes_free: (a: number, b: number) => void;
export const filter: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const filtered_cols: (a: number) => number;
export const filtered_full: (a: number) => [number, number];
export const filtered_full_macs: (a: number) => number;
export const filtered_max_abs_diff: (a: number) => number;
export const filtered_rows: (a: number) => number;
export const filtered_separable: (a: number) => [number, number];
export const filtered_separable_macs: (a: number) => number;
export const simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const truncate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const truncation_approx: (a: number) => [number, number];
export const truncation_factored_params: (a: number) => number;
export const truncation_full_params: (a: number) => number;
export const truncation_relative_residual: (a: number) => number;
export const truncation_singular_values: (a: number) => [number, number];
export const waveframes_dt: (a: number) => number;
export const waveframes_frame: (a: number, b: number) => [number, number];
export const waveframes_peak: (a: number) => number;
export const waveframes_size: (a: number) => number;
export const waveframes_steps: (a: number) => number;
export const waveframes_zoom: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
