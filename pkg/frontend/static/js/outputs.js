// Render DisplayItems in gateway order: one block per item.
import { renderLabelImage } from "./labelImage.js";
import { renderLineChart } from "./lineChart.js";
export function renderOutputs(items, mount) {
    mount.replaceChildren();
    for (const item of items) {
        mount.appendChild(renderItem(item));
    }
}
function renderItem(item) {
    switch (item.type) {
        case "PlotLine":
            return renderLineChart(item);
        case "PlotImage": {
            const figure = document.createElement("figure");
            figure.className = "plot-image";
            const caption = document.createElement("figcaption");
            caption.textContent = item.title;
            figure.append(caption, renderLabelImage(item.image));
            return figure;
        }
        case "NumberDisplay": {
            const block = document.createElement("div");
            block.className = "number-display";
            const label = document.createElement("span");
            label.className = "number-label";
            label.textContent = item.label;
            const value = document.createElement("span");
            value.className = "number-value";
            value.textContent = formatNumber(item.value);
            block.append(label, value);
            return block;
        }
        case "FileDownload": {
            const block = document.createElement("div");
            block.className = "file-download";
            const link = document.createElement("a");
            link.download = item.filename;
            link.href = `data:${item.mime};base64,${item.content_base64}`;
            link.textContent = `download ${item.filename}`;
            block.appendChild(link);
            return block;
        }
        case "TextDisplay": {
            const block = document.createElement("div");
            block.className = "text-display";
            const label = document.createElement("span");
            label.className = "text-label";
            label.textContent = item.label;
            const body = document.createElement("p");
            body.textContent = item.text;
            block.append(label, body);
            return block;
        }
    }
}
function formatNumber(value) {
    if (Number.isInteger(value))
        return String(value);
    return value.toFixed(2);
}
