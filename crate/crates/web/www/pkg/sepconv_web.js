/* @ts-self-types="./sepconv_web.d.ts" */

export class Filtered {
    static __wrap(ptr) {
        const obj = Object.create(Filtered.prototype);
        obj.__wbg_ptr = ptr;
        FilteredFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        FilteredFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_filtered_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    cols() {
        const ret = wasm.filtered_cols(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    full() {
        const ret = wasm.filtered_full(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Multiply-adds of the direct 2D correlation.
     * @returns {number}
     */
    full_macs() {
        const ret = wasm.filtered_full_macs(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    max_abs_diff() {
        const ret = wasm.filtered_max_abs_diff(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    rows() {
        const ret = wasm.filtered_rows(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    separable() {
        const ret = wasm.filtered_separable(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Multiply-adds of the column-then-row passes over all kept terms.
     * @returns {number}
     */
    separable_macs() {
        const ret = wasm.filtered_separable_macs(this.__wbg_ptr);
        return ret >>> 0;
    }
}
if (Symbol.dispose) Filtered.prototype[Symbol.dispose] = Filtered.prototype.free;

export class Truncation {
    static __wrap(ptr) {
        const obj = Object.create(Truncation.prototype);
        obj.__wbg_ptr = ptr;
        TruncationFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        TruncationFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_truncation_free(ptr, 0);
    }
    /**
     * Row-major rank-r kernel.
     * @returns {Float64Array}
     */
    approx() {
        const ret = wasm.truncation_approx(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * `r · (rows + cols)`.
     * @returns {number}
     */
    factored_params() {
        const ret = wasm.truncation_factored_params(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    full_params() {
        const ret = wasm.truncation_full_params(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * `‖K − K_r‖ / ‖K‖`.
     * @returns {number}
     */
    relative_residual() {
        const ret = wasm.truncation_relative_residual(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    singular_values() {
        const ret = wasm.truncation_singular_values(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) Truncation.prototype[Symbol.dispose] = Truncation.prototype.free;

export class WaveFrames {
    static __wrap(ptr) {
        const obj = Object.create(WaveFrames.prototype);
        obj.__wbg_ptr = ptr;
        WaveFramesFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        WaveFramesFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_waveframes_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    dt() {
        const ret = wasm.waveframes_dt(this.__wbg_ptr);
        return ret;
    }
    /**
     * Row-major `n × n` displacement at step `t` (clamped).
     * @param {number} t
     * @returns {Float64Array}
     */
    frame(t) {
        const ret = wasm.waveframes_frame(this.__wbg_ptr, t);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Largest |u| over the whole run, for a fixed color scale.
     * @returns {number}
     */
    peak() {
        const ret = wasm.waveframes_peak(this.__wbg_ptr);
        return ret;
    }
    /**
     * Nodes per axis.
     * @returns {number}
     */
    size() {
        const ret = wasm.waveframes_size(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    steps() {
        const ret = wasm.waveframes_steps(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * `[x0, y0, nx, ny]` of the zone of interest in node indices.
     * @returns {Uint32Array}
     */
    zoom() {
        const ret = wasm.waveframes_zoom(this.__wbg_ptr);
        var v1 = getArrayU32FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 4, 4);
        return v1;
    }
}
if (Symbol.dispose) WaveFrames.prototype[Symbol.dispose] = WaveFrames.prototype.free;

/**
 * @param {Float64Array} field
 * @param {number} rows
 * @param {number} cols
 * @param {Float64Array} kernel
 * @param {number} k_rows
 * @param {number} k_cols
 * @param {number} rank
 * @returns {Filtered}
 */
export function filter(field, rows, cols, kernel, k_rows, k_cols, rank) {
    const ptr0 = passArrayF64ToWasm0(field, wasm.__wbindgen_malloc);
    const len0 = WASM_VECTOR_LEN;
    const ptr1 = passArrayF64ToWasm0(kernel, wasm.__wbindgen_malloc);
    const len1 = WASM_VECTOR_LEN;
    const ret = wasm.filter(ptr0, len0, rows, cols, ptr1, len1, k_rows, k_cols, rank);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Filtered.__wrap(ret[0]);
}

/**
 * @param {number} omega
 * @param {number} xs
 * @param {number} ys
 * @param {number} n
 * @param {number} nt
 * @returns {WaveFrames}
 */
export function simulate(omega, xs, ys, n, nt) {
    const ret = wasm.simulate(omega, xs, ys, n, nt);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return WaveFrames.__wrap(ret[0]);
}

/**
 * @param {Float64Array} values
 * @param {number} rows
 * @param {number} cols
 * @param {number} rank
 * @returns {Truncation}
 */
export function truncate(values, rows, cols, rank) {
    const ptr0 = passArrayF64ToWasm0(values, wasm.__wbindgen_malloc);
    const len0 = WASM_VECTOR_LEN;
    const ret = wasm.truncate(ptr0, len0, rows, cols, rank);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Truncation.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./sepconv_web_bg.js": import0,
    };
}

const FilteredFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_filtered_free(ptr, 1));
const TruncationFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_truncation_free(ptr, 1));
const WaveFramesFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_waveframes_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU32FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint32ArrayMemory0().subarray(ptr / 4, ptr / 4 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint32ArrayMemory0 = null;
function getUint32ArrayMemory0() {
    if (cachedUint32ArrayMemory0 === null || cachedUint32ArrayMemory0.byteLength === 0) {
        cachedUint32ArrayMemory0 = new Uint32Array(wasm.memory.buffer);
    }
    return cachedUint32ArrayMemory0;
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passArrayF64ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 8, 8) >>> 0;
    getFloat64ArrayMemory0().set(arg, ptr / 8);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint32ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('sepconv_web_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
