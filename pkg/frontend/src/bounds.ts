/** Closed-form capability bound for witness criteria: 2 exp(-(sqrt(1+alpha)-1)^2 k). */
export function ewBound(alpha: number, k: number): number {
  if (alpha < 1) {
    throw new Error(`alpha must be >= 1, got ${alpha}`);
  }
  const rate = (Math.sqrt(1 + alpha) - 1) ** 2;
  return 2 * Math.exp(-rate * k);
}
