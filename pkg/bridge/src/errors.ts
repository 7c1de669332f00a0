/** Error raised for any contract violation at the bridge boundary. */
export class BridgeError extends Error {
  /** Stable machine-readable tag, mirrored in CLI output. */
  readonly kind: string;

  constructor(kind: string, message: string) {
    super(message);
    this.name = "BridgeError";
    this.kind = kind;
  }
}

export function formatError(err: unknown): string {
  if (err instanceof BridgeError) {
    return `error: ${err.kind}: ${err.message}`;
  }
  if (err instanceof Error) {
    return `error: ${err.constructor.name}: ${err.message}`;
  }
  return `error: ${String(err)}`;
}
