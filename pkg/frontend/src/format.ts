/** Display formatting. Values pass through unchanged apart from fixed-point
 * rendering, so what is shown is exactly what the API returned. */

export function fmt(value: number | null | undefined, decimals = 2): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "-";
  return value.toFixed(decimals);
}

export function fmtSigned(value: number | null | undefined, decimals = 2): string {
  if (value === null || value === undefined) return "-";
  const text = fmt(value, decimals);
  return value > 0 ? `+${text}` : text;
}

export function pct(value: number | null | undefined, decimals = 1): string {
  if (value === null || value === undefined) return "-";
  return `${value.toFixed(decimals)}%`;
}

/** Raw payload value as a full-precision string (bit-for-bit display). */
export function exact(value: number | null | undefined): string {
  if (value === null || value === undefined) return "-";
  return String(value);
}
