// Minimal surface of the optional model backend; installed separately.
declare module "@xenova/transformers" {
  export function pipeline(
    task: string,
    model?: string,
    options?: Record<string, unknown>,
  ): Promise<any>;
}
