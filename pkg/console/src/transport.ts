// Transport abstraction: the store only needs line-in/line-out. The
// browser uses a WebSocket (the server speaks the same newline-JSON over
// text frames); tests plug in fakes or a Node TCP socket.

export interface Transport {
  send(line: string): void;
  close(): void;
  onLine: ((line: string) => void) | null;
  onOpen: (() => void) | null;
  onClose: (() => void) | null;
}

export class WebSocketTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;
  private socket: WebSocket;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.onopen = () => this.onOpen?.();
    this.socket.onclose = () => this.onClose?.();
    this.socket.onerror = () => this.onClose?.();
    this.socket.onmessage = (event) => {
      // one protocol message per frame; tolerate trailing newline
      const text = typeof event.data === "string" ? event.data : "";
      for (const line of text.split("\n")) {
        if (line.trim().length > 0) this.onLine?.(line);
      }
    };
  }

  send(line: string): void {
    this.socket.send(line);
  }

  close(): void {
    this.socket.close();
  }
}
