export function mean(values: number[]): number {
  if (values.length === 0) return NaN;
  return values.reduce((sum, v) => sum + v, 0) / values.length;
}

/** Population standard deviation (divide by N, not N-1). */
export function populationStd(values: number[]): number {
  if (values.length === 0) return NaN;
  const avg = mean(values);
  const sq = values.reduce((acc, v) => acc + (v - avg) ** 2, 0);
  return Math.sqrt(sq / values.length);
}
