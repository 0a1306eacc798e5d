import sys

from InvoiceReader.InvoiceReaderCLI import main

sys.exit(main())
