/** Raised when an input file is missing, malformed, or lacks an expected
 * column or field. The CLI maps this to exit code 2. */
export class DataError extends Error {}
