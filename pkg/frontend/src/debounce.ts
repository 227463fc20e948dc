// Trailing-edge debounce with cancel/flush, enough for keystroke batching.

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  flush(): void;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | undefined;
  let pending: A | undefined;

  const wrapped = (...args: A) => {
    pending = args;
    clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      const args = pending as A;
      pending = undefined;
      fn(...args);
    }, waitMs);
  };
  wrapped.cancel = () => {
    clearTimeout(timer);
    timer = undefined;
    pending = undefined;
  };
  wrapped.flush = () => {
    if (pending !== undefined) {
      const args = pending;
      wrapped.cancel();
      fn(...args);
    }
  };
  return wrapped;
}
