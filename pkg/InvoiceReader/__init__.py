name="InvoiceReader"
__all__ = ["DocModel", "OCRIngest", "LayoutAnalyzer", "TextAnnotator", "EntityAnnotator", "RuleEngine",
           "InfoExtractor", "PageClassifier", "Evaluation", "Pipeline", "PipelineConfig", "Errors",
           "QInvoiceWidget", "InvoiceReaderCLI"]
