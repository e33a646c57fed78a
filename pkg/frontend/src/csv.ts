// Minimal RFC-4180 reader for the backend's artifact CSVs.

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let cell = "";
  let inQuotes = false;
  let sawAny = false;
  for (let i = 0; i < text.length; i++) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          cell += '"';
          i += 1;
        } else {
          inQuotes = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      sawAny = true;
    } else if (ch === ",") {
      row.push(cell);
      cell = "";
      sawAny = true;
    } else if (ch === "\n" || ch === "\r") {
      if (ch === "\r" && text[i + 1] === "\n") i += 1;
      if (sawAny || cell !== "") {
        row.push(cell);
        rows.push(row);
      }
      row = [];
      cell = "";
      sawAny = false;
    } else {
      cell += ch;
      sawAny = true;
    }
  }
  if (sawAny || cell !== "") {
    row.push(cell);
    rows.push(row);
  }
  return rows;
}

export interface Series {
  header: string[];
  rows: string[][];
}

export function parseSeries(text: string): Series {
  const rows = parseCsv(text);
  if (rows.length === 0) return { header: [], rows: [] };
  return { header: rows[0], rows: rows.slice(1) };
}
